//! Parameter resolution: flat TOML config first, command-line flags on top.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};

/// Bad user input that never reached the physics layer. Exit code 1.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InvalidInput(msg.into()).into()
}

/// Numeric keys accepted in a config file. Flags use the same names with
/// `-` in place of `_`.
pub const NUMERIC_KEYS: &[&str] = &[
    "A", "T", "beta_i", "beta_r", "contrast", "delta", "g", "grid_points", "k0", "kbar", "mu",
    "n_atoms", "phi_ctrl", "prior_dt", "seed", "sigma", "sigma_v", "t", "t_min", "tol", "u",
    "u_points",
];

pub const SWITCH_KEYS: &[&str] = &["oracle", "tuned"];

#[derive(Debug, Default)]
pub struct Params {
    values: BTreeMap<String, f64>,
    switches: BTreeMap<String, bool>,
    used: RefCell<BTreeMap<String, String>>,
}

fn normalize(key: &str) -> String {
    key.replace('-', "_")
}

impl Params {
    /// Reads `config` (if any) and applies the flags that were given.
    pub fn load(
        config: Option<&Path>,
        flags: &[(&str, Option<f64>)],
        switches: &[(&str, bool)],
    ) -> Result<Self> {
        let mut p = Params::default();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| invalid(format!("reading config {}: {e}", path.display())))?;
            p.merge_toml(&text)
                .with_context(|| format!("in config {}", path.display()))?;
        }
        for &(key, value) in flags {
            if let Some(v) = value {
                p.values.insert(key.to_string(), v);
            }
        }
        for &(key, on) in switches {
            if on {
                p.switches.insert(key.to_string(), true);
            }
        }
        Ok(p)
    }

    fn merge_toml(&mut self, text: &str) -> Result<()> {
        let table: toml::Table = text.parse().map_err(|e| invalid(format!("{e}")))?;
        for (raw, value) in table {
            let key = normalize(&raw);
            if SWITCH_KEYS.contains(&key.as_str()) {
                let on = value
                    .as_bool()
                    .ok_or_else(|| invalid(format!("`{raw}` must be true or false")))?;
                self.switches.insert(key, on);
                continue;
            }
            if !NUMERIC_KEYS.contains(&key.as_str()) {
                return Err(invalid(format!("unknown key `{raw}`")));
            }
            let v = match value {
                toml::Value::Integer(i) => i as f64,
                toml::Value::Float(x) => x,
                _ => return Err(invalid(format!("`{raw}` must be a number"))),
            };
            self.values.insert(key, v);
        }
        Ok(())
    }

    fn record(&self, key: &str, shown: String) {
        self.used.borrow_mut().insert(key.to_string(), shown);
    }

    /// Resolved value of `key`, falling back to `default`. Must be finite.
    pub fn num(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.values.get(key).copied().unwrap_or(default);
        if !v.is_finite() {
            return Err(invalid(format!("`{key}` must be finite, got {v}")));
        }
        self.record(key, format!("{v:?}"));
        Ok(v)
    }

    /// Positive integer parameter.
    pub fn count(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.values.get(key).copied().unwrap_or(default as f64);
        if !(v >= 1.0) || v.fract() != 0.0 || v > 9.0e15 {
            return Err(invalid(format!("`{key}` must be a positive integer, got {v}")));
        }
        self.record(key, format!("{}", v as u64));
        Ok(v as usize)
    }

    pub fn switch(&self, key: &str) -> bool {
        let on = self.switches.get(key).copied().unwrap_or(false);
        self.record(key, on.to_string());
        on
    }

    /// Records a derived value (for instance a tuned detuning) in the metadata.
    pub fn derived(&self, key: &str, value: impl fmt::Debug) {
        self.record(key, format!("{value:?}"));
    }

    /// Every parameter that was read, sorted by name.
    pub fn metadata(&self) -> Vec<(String, String)> {
        self.used.borrow().iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

/// `n` evenly spaced points from `a` to `b`; a single point sits at `b`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![b];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { b } else { a + step * i as f64 }).collect()
}

/// Sweep from `t_min` up to `end`. `t_min` defaults to one step above zero.
pub fn time_sweep(p: &Params, end_key: &str, end_default: f64, n_default: usize, from_zero: bool) -> Result<Vec<f64>> {
    let end = p.num(end_key, end_default)?;
    let n = p.count("grid_points", n_default)?;
    let start_default = if from_zero { 0.0 } else { end / n as f64 };
    let start = p.num("t_min", start_default)?;
    if start < 0.0 || end <= 0.0 {
        return Err(invalid(format!("times must be non-negative, got [{start}, {end}]")));
    }
    if n > 1 && start >= end {
        return Err(invalid(format!("`t_min` = {start} must lie below the end time {end}")));
    }
    Ok(linspace(start, end, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "k0 = 2\nsigma-v = 0.5\ntuned = true\n").unwrap();
        let p = Params::load(Some(&path), &[("k0", Some(3.0)), ("g", None)], &[]).unwrap();
        assert_eq!(p.num("k0", 1.0).unwrap(), 3.0);
        assert_eq!(p.num("sigma_v", 1.0).unwrap(), 0.5);
        assert_eq!(p.num("g", 9.81).unwrap(), 9.81);
        assert!(p.switch("tuned"));
        let meta = p.metadata();
        assert_eq!(meta[0], ("g".to_string(), "9.81".to_string()));
    }

    #[test]
    fn rejects_bad_config() {
        let mut p = Params::default();
        assert!(p.merge_toml("kzero = 1").is_err());
        assert!(p.merge_toml("k0 = \"big\"").is_err());
        assert!(p.merge_toml("tuned = 1").is_err());
        assert!(p.merge_toml("not toml [").is_err());
    }

    #[test]
    fn counts_and_sweeps() {
        let p = Params::load(None, &[("grid_points", Some(2.5))], &[]).unwrap();
        assert!(p.count("grid_points", 3).is_err());
        assert_eq!(linspace(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linspace(0.0, 1.0, 1), vec![1.0]);
        let q = Params::load(None, &[("grid_points", Some(4.0))], &[]).unwrap();
        assert_eq!(time_sweep(&q, "t", 2.0, 10, false).unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
    }
}
