//! Merges artifacts written by the other subcommands into one summary.

use crate::io::{CmdResult, Failure, VERSION};
use polyroth::DecayFit;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Default)]
struct Summary {
    warnings: Vec<String>,
    admissible: Vec<Value>,
    decay: Vec<Value>,
    gaps: BTreeMap<String, (f64, usize)>,
    stationary: Vec<Value>,
    other: Vec<Value>,
}

/// A CSV artifact: the tags of its version line plus header and rows.
struct Table {
    version: String,
    tags: BTreeMap<String, String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str) -> Option<Table> {
        let (first, rest) = text.split_once('\n')?;
        let mut words = first.strip_prefix("# polyroth-version ")?.split_whitespace();
        let version = words.next()?.to_string();
        let tags = words.filter_map(|w| w.split_once('=')).map(|(k, v)| (k.into(), v.into())).collect();
        let mut r = csv::Reader::from_reader(rest.as_bytes());
        let header = r.headers().ok()?.iter().map(String::from).collect();
        let rows = r.records().filter_map(|x| x.ok()).map(|x| x.iter().map(String::from).collect()).collect();
        Some(Table { version, tags, header, rows })
    }

    fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r.get(i).and_then(|c| parse_cell(c))).collect()
    }

    fn kind(&self) -> &str {
        self.tags.get("kind").map_or("unknown", String::as_str)
    }
}

/// Decimal or `2^k`.
fn parse_cell(c: &str) -> Option<f64> {
    match c.strip_prefix("2^") {
        Some(e) => e.parse::<i32>().ok().map(|k| 2f64.powi(k)),
        None => c.parse().ok(),
    }
}

impl Summary {
    fn check_version(&mut self, case: &str, version: &str) {
        if version != VERSION {
            self.warnings.push(format!("{case}: written by version {version}, this is {VERSION}"));
        }
    }

    fn add_json(&mut self, case: &str, v: &Value) {
        match v.get("version").and_then(Value::as_str) {
            Some(ver) => self.check_version(case, ver),
            None => self.warnings.push(format!("{case}: no version field")),
        }
        let kind = v.get("kind").and_then(Value::as_str).unwrap_or("unknown");
        match kind {
            "admissible" => {
                for p in v.get("pairs").and_then(Value::as_array).into_iter().flatten() {
                    let mut row = p.clone();
                    row["case"] = json!(case);
                    self.admissible.push(row);
                }
            }
            _ => {
                let mut entry = v.clone();
                if let Some(m) = entry.as_object_mut() {
                    m.remove("config");
                    m.remove("version");
                }
                entry["case"] = json!(case);
                self.other.push(entry);
            }
        }
    }

    fn add_table(&mut self, case: &str, t: Table) {
        self.check_version(case, &t.version);
        match t.kind() {
            "decay" => match (t.column("m"), t.column("log2_norm_max")) {
                (Some(m), Some(y)) => match DecayFit::fit(&m, &y, 3) {
                    Ok(fit) => self.decay.push(json!({
                        "case": case, "gamma": fit.gamma(), "residual": fit.max_residual, "m": m, "log2_norm_max": y,
                    })),
                    Err(e) => self.warnings.push(format!("{case}: {e}")),
                },
                _ => self.warnings.push(format!("{case}: decay table lacks numeric m or log2_norm_max")),
            },
            "patterns-sweep" => match (t.column("epsilon"), t.column("max_gap")) {
                (Some(eps), Some(gap)) => {
                    for (e, g) in eps.into_iter().zip(gap) {
                        let slot = self.gaps.entry(format!("{e}")).or_insert((f64::INFINITY, 0));
                        slot.0 = slot.0.min(g);
                        slot.1 += 1;
                    }
                }
                _ => self.warnings.push(format!("{case}: sweep table lacks epsilon or max_gap")),
            },
            "stationary" => {
                let cols = ["lambda", "remainder", "normalized_remainder", "quadrature_error"];
                let mut entry = json!({"case": case});
                for c in cols {
                    entry[c] = json!(t.column(c));
                }
                entry["slope"] = json!(t.tags.get("slope").and_then(|s| s.parse::<f64>().ok()));
                self.stationary.push(entry);
            }
            kind => self.other.push(json!({"case": case, "kind": kind, "tags": t.tags, "rows": t.rows.len()})),
        }
    }

    fn into_value(self) -> Value {
        let gaps: Vec<Value> = self
            .gaps
            .into_iter()
            .map(|(e, (g, n))| json!({"epsilon": e.parse::<f64>().ok(), "min_max_gap": g, "sets": n}))
            .collect();
        json!({
            "version": VERSION,
            "kind": "report",
            "warnings": self.warnings,
            "admissible_pairs": self.admissible,
            "decay_fits": self.decay,
            "pattern_gaps": gaps,
            "stationary": self.stationary,
            "other": self.other,
        })
    }
}

/// Best-effort merge; problems with single files become warnings.
pub fn summarize(files: &[impl AsRef<Path>]) -> CmdResult<Value> {
    let mut s = Summary::default();
    for f in files {
        let path = f.as_ref();
        let case = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Precondition(format!("cannot read {case}: {e}")))?;
        if text.trim_start().starts_with('{') {
            match serde_json::from_str::<Value>(&text) {
                Ok(v) => s.add_json(&case, &v),
                Err(e) => s.warnings.push(format!("{case}: invalid JSON: {e}")),
            }
        } else {
            match Table::parse(&text) {
                Some(t) => s.add_table(&case, t),
                None => s.warnings.push(format!("{case}: not a polyroth artifact")),
            }
        }
    }
    Ok(s.into_value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn empty_bundle() {
        let v = summarize(&[] as &[&Path]).unwrap();
        assert_eq!(v["warnings"], json!([]));
        assert_eq!(v["decay_fits"], json!([]));
    }

    #[test]
    fn decay_tables_and_versions() {
        let dir = tempfile::tempdir().unwrap();
        let mut files = Vec::new();
        for (i, slope) in [0.5, 0.25, 0.75].into_iter().enumerate() {
            let mut text = format!("# polyroth-version {VERSION} kind=decay seed={i}\nm,log2_norm_max,trials\n");
            for m in 6..=9 {
                text.push_str(&format!("{m},{},16\n", -slope * m as f64));
            }
            files.push(write(dir.path(), &format!("d{i}.csv"), &text));
        }
        let v = summarize(&files).unwrap();
        let fits = v["decay_fits"].as_array().unwrap();
        assert_eq!(fits.len(), 3);
        assert!((fits[1]["gamma"].as_f64().unwrap() - 0.25).abs() < 1e-12);
        assert!(v["warnings"].as_array().unwrap().is_empty());

        let old = write(dir.path(), "old.json", r#"{"version": "0.0.1", "kind": "trilinear", "value": 0.5}"#);
        let v = summarize(&[files[0].clone(), old]).unwrap();
        assert_eq!(v["warnings"].as_array().unwrap().len(), 1);
        assert_eq!(v["other"][0]["value"], json!(0.5));
    }

    #[test]
    fn dyadic_cells() {
        assert_eq!(parse_cell("2^-3"), Some(0.125));
        assert_eq!(parse_cell("1.5e0"), Some(1.5));
        assert_eq!(parse_cell(""), None);
    }
}
