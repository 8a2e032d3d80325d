//! Flat key→number reports with deterministic rendering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::tensor::DenseTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    Text,
    Json,
    Csv,
}

/// Values are kept in sorted key order. Keys registered through [`Report::defect`]
/// are compared against the tolerance by [`Report::failures`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    values: BTreeMap<String, f64>,
    defects: BTreeSet<String>,
}

/// Shortest decimal that round-trips the `f64` (at most 17 significant digits).
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "Infinity".into() } else { "-Infinity".into() };
    }
    let a = x.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn defect(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        let k = key.into();
        self.defects.insert(k.clone());
        self.values.insert(k, v);
        self
    }

    /// Entries `key[i][j]..` with 1-based indices.
    pub fn tensor(&mut self, key: &str, t: &DenseTensor) -> &mut Self {
        for idx in t.indices() {
            let mut k = key.to_string();
            for i in &idx {
                let _ = write!(k, "[{}]", i + 1);
            }
            self.values.insert(k, t.get(&idx));
        }
        self
    }

    pub fn vector(&mut self, key: &str, v: &[f64]) -> &mut Self {
        for (i, x) in v.iter().enumerate() {
            self.values.insert(format!("{key}[{}]", i + 1), *x);
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(|s| s.as_str())
    }

    pub fn merge(&mut self, prefix: &str, other: &Report) -> &mut Self {
        for (k, v) in &other.values {
            let key = format!("{prefix}{k}");
            if other.defects.contains(k) {
                self.defects.insert(key.clone());
            }
            self.values.insert(key, *v);
        }
        self
    }

    /// Defect keys whose value exceeds `tol` or is not finite.
    pub fn failures(&self, tol: f64) -> Vec<(&str, f64)> {
        self.defects
            .iter()
            .map(|k| (k.as_str(), self.values[k]))
            .filter(|(_, v)| !(v.abs() <= tol))
            .collect()
    }

    pub fn render(&self, mode: OutputMode) -> String {
        match mode {
            OutputMode::Text => {
                let w = self.values.keys().map(|k| k.chars().count()).max().unwrap_or(0);
                let mut out = String::new();
                for (k, v) in &self.values {
                    let pad = w - k.chars().count();
                    let _ = writeln!(out, "{}{k} = {}", " ".repeat(pad), format_number(*v));
                }
                out
            }
            OutputMode::Json => {
                if self.values.is_empty() {
                    return "{}\n".into();
                }
                let mut out = String::from("{\n");
                let last = self.values.len() - 1;
                for (n, (k, v)) in self.values.iter().enumerate() {
                    let num = if v.is_finite() { format_number(*v) } else { format!("\"{}\"", format_number(*v)) };
                    let _ = writeln!(out, "  {}: {num}{}", serde_json::to_string(k).expect("string"), if n < last { "," } else { "" });
                }
                out.push_str("}\n");
                out
            }
            OutputMode::Csv => {
                let mut out = String::from("key,value\n");
                for (k, v) in &self.values {
                    let _ = writeln!(out, "{k},{}", format_number(*v));
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_empty_document() {
        assert_eq!(Report::new().render(OutputMode::Json), "{}\n");
        assert_eq!(Report::new().render(OutputMode::Text), "");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1 + 0.2, 1.0 / 3.0, 3.0, -2.5e-12, 6.02e23] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn sorted_and_aligned() {
        let mut r = Report::new();
        r.value("zeta", 1.0).value("a", 2.0).defect("mid", 1e-3);
        let text = r.render(OutputMode::Text);
        assert_eq!(text, "   a = 2\n mid = 0.001\nzeta = 1\n");
        assert_eq!(r.failures(1e-4), vec![("mid", 1e-3)]);
        let json: serde_json::Value = serde_json::from_str(&r.render(OutputMode::Json)).unwrap();
        assert_eq!(json["a"], 2.0);
    }
}
