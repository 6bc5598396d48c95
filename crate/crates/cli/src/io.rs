//! Input loading, value parsers and atomic output.

use polyroth::patterns::IntervalSet;
use polyroth::poly::{MonicPoly, Poly};
use polyroth::scale::AdmissiblePair;
use polyroth::{Error, GridFunction};
use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or an unmet precondition.
    Precondition(String),
    /// A quadrature could not reach its tolerance.
    Unresolved(String),
    /// The computation finished but a checked property failed.
    Check(String),
    /// Anything else, such as I/O trouble.
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Precondition(_) => 2,
            Failure::Unresolved(_) => 3,
            Failure::Check(_) => 4,
            Failure::Other(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Precondition(m) | Failure::Unresolved(m) | Failure::Check(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Unresolved { .. } => Failure::Unresolved(e.to_string()),
            e if e.is_precondition() => Failure::Precondition(e.to_string()),
            e => Failure::Other(e.to_string()),
        }
    }
}

pub type CmdResult<T> = std::result::Result<T, Failure>;

fn read_json(path: &Path) -> CmdResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Precondition(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Precondition(format!("{}: invalid JSON: {e}", path.display())))
}

fn in_file(path: &Path, e: Error) -> Failure {
    Failure::Precondition(format!("{}: {e}", path.display()))
}

pub fn load_poly(path: &Path) -> CmdResult<MonicPoly<f64>> {
    MonicPoly::from_json(&read_json(path)?).map_err(|e| in_file(path, e))
}

pub fn load_grid(path: &Path) -> CmdResult<GridFunction> {
    GridFunction::from_json(&read_json(path)?).map_err(|e| in_file(path, e))
}

pub fn load_set(path: &Path) -> CmdResult<IntervalSet> {
    IntervalSet::from_json(&read_json(path)?).map_err(|e| in_file(path, e))
}

/// Reference `file.json#k` to the k-th pair of an `admissible` output.
#[derive(Debug, Clone)]
pub struct PairRef {
    pub path: PathBuf,
    pub index: usize,
}

impl std::str::FromStr for PairRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (path, idx) = match s.rsplit_once('#') {
            Some((p, i)) => (p, i.parse().map_err(|_| format!("bad pair index {i:?}"))?),
            None => (s, 0),
        };
        if path.is_empty() {
            return Err("empty pair file name".into());
        }
        Ok(PairRef { path: path.into(), index: idx })
    }
}

/// Resolves a pair reference into the pair and the polynomial it was built for.
pub fn load_pair(r: &PairRef) -> CmdResult<(AdmissiblePair, MonicPoly<f64>)> {
    let v = read_json(&r.path)?;
    let schema = |ptr: &str, msg: &str| in_file(&r.path, Error::schema(ptr, msg));
    let poly = MonicPoly::from_json(v.get("polynomial").ok_or_else(|| schema("/polynomial", "missing field"))?)
        .map_err(|e| in_file(&r.path, e))?;
    let pairs = v
        .get("pairs")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("/pairs", "missing array"))?;
    let pointer = format!("/pairs/{}", r.index);
    let raw = pairs.get(r.index).ok_or_else(|| schema(&pointer, "index out of range"))?;
    let pair: AdmissiblePair =
        serde_json::from_value(raw.clone()).map_err(|e| schema(&pointer, &e.to_string()))?;
    Ok((pair, poly))
}

/// Phase polynomial from either a pair reference or explicit coefficients.
pub fn phase_poly(pair: &Option<PairRef>, coeffs: &Option<Vec<f64>>) -> CmdResult<(Poly<f64>, Option<AdmissiblePair>)> {
    match (pair, coeffs) {
        (Some(r), None) => {
            let (pair, p) = load_pair(r)?;
            Ok((pair.q_polynomial(&p)?, Some(pair)))
        }
        (None, Some(c)) => Ok((Poly::new(c.clone()), None)),
        _ => Err(Failure::Precondition("give exactly one of --pair and --q".into())),
    }
}

/// `a:b` as an inclusive integer range.
pub fn parse_int_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: i64 = a.trim().parse().map_err(|_| format!("bad bound {a:?}"))?;
    let hi: i64 = b.trim().parse().map_err(|_| format!("bad bound {b:?}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// Consecutive powers of two.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep(pub Vec<f64>);

/// `2^a:2^b` or `a:b` with exponents, listing every power of two in between.
pub fn parse_dyadic_sweep(s: &str) -> Result<Sweep, String> {
    let strip = |x: &str| x.trim().trim_start_matches("2^").to_string();
    let (a, b) = s.split_once(':').ok_or("expected 2^lo:2^hi")?;
    let (lo, hi) = parse_int_range(&format!("{}:{}", strip(a), strip(b)))?;
    if hi - lo > 64 {
        return Err("sweep longer than 64 steps".into());
    }
    Ok(Sweep((lo..=hi).map(|k| 2f64.powi(k as i32)).collect()))
}

/// A number, also accepting `2^k`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some(e) = s.strip_prefix("2^") {
        let k: i32 = e.parse().map_err(|_| format!("bad exponent {e:?}"))?;
        return Ok(2f64.powi(k));
    }
    s.parse().map_err(|_| format!("bad number {s:?}"))
}

/// `x0:x1,y0:y1`.
pub fn parse_rect(s: &str) -> Result<polyroth::oscillatory::Rect, String> {
    let (x, y) = s.split_once(',').ok_or("expected x0:x1,y0:y1")?;
    let side = |p: &str| -> Result<(f64, f64), String> {
        let (a, b) = p.split_once(':').ok_or("expected lo:hi")?;
        let (a, b) = (parse_number(a)?, parse_number(b)?);
        if a >= b {
            return Err(format!("empty side {p}"));
        }
        Ok((a, b))
    };
    Ok(polyroth::oscillatory::Rect { x: side(x)?, y: side(y)? })
}

/// Writes `2^k` for exact powers of two and the shortest round-trip decimal otherwise.
pub fn fmt_dyadic(x: f64) -> String {
    if x > 0.0 && x.is_finite() {
        let k = x.log2().round();
        if 2f64.powi(k as i32) == x {
            return format!("2^{k}");
        }
    }
    format!("{x:e}")
}

/// Where a command's artifact goes.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Sink { path }
    }

    /// Writes the bytes through a temporary file in the target directory and
    /// renames it into place, so readers never see a partial artifact.
    pub fn write(&self, bytes: &[u8]) -> CmdResult<()> {
        let io = |e: std::io::Error| Failure::Other(format!("write failed: {e}"));
        match &self.path {
            None => std::io::stdout().write_all(bytes).map_err(io),
            Some(path) => {
                let dir = match path.parent() {
                    Some(d) if !d.as_os_str().is_empty() => d,
                    _ => Path::new("."),
                };
                let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
                tmp.write_all(bytes).map_err(io)?;
                tmp.as_file().sync_all().map_err(io)?;
                tmp.persist(path).map_err(|e| io(e.error))?;
                Ok(())
            }
        }
    }

    pub fn json(&self, v: &Value) -> CmdResult<()> {
        let mut text = serde_json::to_string_pretty(v).expect("JSON values always serialize");
        text.push('\n');
        self.write(text.as_bytes())
    }

    /// CSV behind a `# polyroth-version` line that also carries
    /// `key=value` tags such as the artifact kind and the seed.
    pub fn csv(&self, tags: &str, header: &[&str], rows: &[Vec<String>]) -> CmdResult<()> {
        let mut w = csv::Writer::from_writer(format!("# polyroth-version {VERSION} {tags}\n").into_bytes());
        let fail = |e: csv::Error| Failure::Other(e.to_string());
        w.write_record(header).map_err(fail)?;
        for r in rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Other(e.to_string()))?;
        self.write(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps_and_numbers() {
        assert_eq!(parse_dyadic_sweep("2^8:2^10").unwrap().0, vec![256.0, 512.0, 1024.0]);
        assert_eq!(parse_dyadic_sweep("-1:0").unwrap().0, vec![0.5, 1.0]);
        assert!(parse_dyadic_sweep("3:1").is_err());
        assert_eq!(parse_number("2^-3").unwrap(), 0.125);
        assert_eq!(parse_number("1e4").unwrap(), 1e4);
        assert_eq!(parse_int_range("-50:50").unwrap(), (-50, 50));
    }

    #[test]
    fn dyadic_formatting() {
        assert_eq!(fmt_dyadic(2f64.powi(-31)), "2^-31");
        assert_eq!(fmt_dyadic(1.0), "2^0");
        assert_eq!(fmt_dyadic(3.0), "3e0");
        assert_eq!(fmt_dyadic(0.0), "0e0");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::from(Error::precondition("x")).exit_code(), 2);
        assert_eq!(Failure::from(Error::schema("/n", "x")).exit_code(), 2);
        assert_eq!(Failure::from(Error::Unresolved { estimate: 1.0, error: 1.0 }).exit_code(), 3);
        assert_eq!(Failure::Check("x".into()).exit_code(), 4);
    }

    #[test]
    fn pair_references() {
        let r: PairRef = "out/pairs.json#3".parse().unwrap();
        assert_eq!((r.path.to_str().unwrap(), r.index), ("out/pairs.json", 3));
        let r: PairRef = "pairs.json".parse().unwrap();
        assert_eq!(r.index, 0);
        assert!("p.json#x".parse::<PairRef>().is_err());
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        std::fs::write(&path, "old contents that are longer").unwrap();
        Sink::new(Some(path.clone())).write(b"new").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "new");
        // only the target remains, no stray temporaries
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
