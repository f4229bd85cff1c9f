//! Verification records, one JSON object per line.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    /// Acceptance group the check belongs to.
    pub criterion: String,
    pub params: BTreeMap<String, f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl CheckReport {
    /// Passes when `residual <= tolerance` (NaN fails).
    pub fn new(criterion: &str, check: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            criterion: criterion.to_string(),
            params: BTreeMap::new(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            note: String::new(),
        }
    }

    /// Passes when `value > threshold`; the threshold goes in `tolerance`.
    pub fn exceeds(criterion: &str, check: &str, value: f64, threshold: f64) -> Self {
        let mut r = Self::new(criterion, check, value, threshold);
        r.passed = value > threshold;
        r
    }

    /// Failed check for an error raised before a residual existed.
    pub fn errored(criterion: &str, check: &str, err: &crate::Error) -> Self {
        let mut r = Self::new(criterion, check, f64::NAN, 0.0);
        r.note = format!("{}: {err}", err.name());
        r
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// `PASS`/`FAIL` summary line.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{status} [{}] {}: residual {:.3e} (tol {:.1e})",
            self.criterion, self.check, self.residual, self.tolerance
        );
        if !self.note.is_empty() {
            s.push_str(" -- ");
            s.push_str(&self.note);
        }
        s
    }
}

/// Writes one JSON record per line. Non-finite residuals become `null`.
pub fn write_records<W: Write>(mut out: W, reports: &[CheckReport]) -> io::Result<()> {
    for r in reports {
        let line = serde_json::to_string(r).map_err(io::Error::other)?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads records written by [`write_records`], skipping blank lines.
pub fn read_records<R: BufRead>(input: R) -> io::Result<Vec<CheckReport>> {
    let mut v = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut value: serde_json::Value = serde_json::from_str(&line).map_err(io::Error::other)?;
        if value["residual"].is_null() {
            value["residual"] = serde_json::json!(f64::MAX);
        }
        let mut r: CheckReport = serde_json::from_value(value).map_err(io::Error::other)?;
        if r.residual == f64::MAX {
            r.residual = f64::NAN;
        }
        v.push(r);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let a = CheckReport::new("kc", "fringe", 2e-5, 1e-4).param("k0", 4.0);
        let b = CheckReport::errored("opto", "fd", &crate::Error::Indeterminate);
        let c = CheckReport::exceeds("identities", "quartic", 0.3, 1e-2);
        assert!(a.passed && !b.passed && c.passed);
        let mut buf = Vec::new();
        write_records(&mut buf, &[a.clone(), b, c.clone()]).unwrap();
        assert_eq!(String::from_utf8_lossy(&buf).lines().count(), 3);
        let back = read_records(&buf[..]).unwrap();
        assert_eq!(back[0], a);
        assert!(back[1].residual.is_nan() && back[1].note.starts_with("Indeterminate"));
        assert_eq!(back[2], c);
        assert!(a.line().starts_with("PASS [kc] fringe"));
    }
}
