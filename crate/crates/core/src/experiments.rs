//! Literature-anchored ⁸⁷Rb numbers: thermal velocity proxies, retention
//! estimates for named platforms, inverse requirements and localization
//! bounds. Everything here is SI.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::freefall::{self, GaussianProbe};
use crate::kasevich_chu::fullstate_retention;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_boltzmann: f64,
    pub m_rb87: f64,
    /// Fixed at 9.81; no value of `g` is stated alongside the printed estimates.
    pub g_standard: f64,
}

impl PhysicalConstants {
    pub const STANDARD: Self = Self {
        hbar: 1.0545718e-34,
        k_boltzmann: 1.380649e-23,
        m_rb87: 1.443e-25,
        g_standard: 9.81,
    };

    pub fn standard() -> Self {
        Self::STANDARD
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformSpec {
    pub label: String,
    /// Source temperature in K.
    pub t_src: f64,
    /// Interrogation time in s.
    pub t_int: f64,
    pub notes: String,
    /// Set when the point is only a source-scale comparison.
    pub caveat: bool,
}

impl PlatformSpec {
    pub fn new(label: &str, t_src: f64, t_int: f64) -> Result<Self> {
        require_positive("t_src", t_src)?;
        require_positive("t_int", t_int)?;
        Ok(Self {
            label: label.to_string(),
            t_src,
            t_int,
            notes: String::new(),
            caveat: false,
        })
    }

    pub fn with_notes(mut self, notes: &str) -> Self {
        self.notes = notes.to_string();
        self
    }

    pub fn with_caveat(mut self, notes: &str) -> Self {
        self.caveat = true;
        self.notes = notes.to_string();
        self
    }
}

pub const MICROKELVIN: f64 = 1e-6;

fn platform(label: &str, t_src: f64, t_int: f64) -> PlatformSpec {
    PlatformSpec::new(label, t_src, t_int).expect("built-in platform is valid")
}

/// AQG, 2 μK, T = 60 ms.
pub fn aqg() -> PlatformSpec {
    platform("AQG", 2.0 * MICROKELVIN, 0.060)
}

/// GAIN, 2 μK source-scale proxy, T = 260 ms.
pub fn gain() -> PlatformSpec {
    platform("GAIN", 2.0 * MICROKELVIN, 0.260)
        .with_notes("velocity-selected; source-scale width is an upper-bound proxy")
}

/// Einstein Elevator sensitivity point, 7.5 μK, T = 100 ms.
pub fn einstein_elevator() -> PlatformSpec {
    platform("Einstein Elevator", 7.5e-6, 0.100)
}

/// Einstein Elevator extended coherent operation, T = 130 ms.
pub fn einstein_elevator_extended() -> PlatformSpec {
    platform("Einstein Elevator (extended)", 7.5e-6, 0.130)
}

/// Stanford fountain marker at 160 ms. No source temperature is quoted for
/// it, so the 2 μK microkelvin scale is used.
pub fn stanford() -> PlatformSpec {
    platform("Stanford fountain", 2.0 * MICROKELVIN, 0.160)
        .with_notes("no source temperature quoted; 2 uK microkelvin scale assumed")
}

/// MIGA source scale at the 250 ms design separation.
pub fn miga() -> PlatformSpec {
    platform("MIGA", 2.0 * MICROKELVIN, 0.250)
        .with_caveat("source-scale comparison only; velocity-selected input is much narrower")
}

/// 30 nK ultracold-source capability, drawn out to 250 ms.
pub fn ultracold_proxy() -> PlatformSpec {
    platform("ultracold proxy (30 nK)", 30e-9, 0.250)
        .with_notes("source capability, not the operating temperature")
}

/// Platforms behind the constrained-regime figure.
pub fn figure3_platforms() -> Vec<PlatformSpec> {
    vec![aqg(), einstein_elevator(), stanford(), miga(), ultracold_proxy()]
}

/// Platforms quoted with explicit estimates.
pub fn baseline_platforms() -> Vec<PlatformSpec> {
    vec![aqg(), gain(), einstein_elevator(), einstein_elevator_extended(), stanford(), miga()]
}

/// One-dimensional rms velocity `√(k_B·T_src/m)`.
pub fn thermal_sigma_v(t_src: f64, mass: f64) -> Result<f64> {
    require_positive("t_src", t_src)?;
    require_positive("mass", mass)?;
    Ok((PhysicalConstants::STANDARD.k_boltzmann * t_src / mass).sqrt())
}

/// Minimum-uncertainty width `ħ/(√2·m·σ_v)`.
pub fn gaussian_width_proxy(sigma_v: f64, mass: f64) -> Result<f64> {
    require_positive("sigma_v", sigma_v)?;
    require_positive("mass", mass)?;
    Ok(PhysicalConstants::STANDARD.hbar / (std::f64::consts::SQRT_2 * mass * sigma_v))
}

/// Full-state KC retention for the platform at `g_standard`.
pub fn retention_estimate(spec: &PlatformSpec) -> Result<f64> {
    retention_at(spec, spec.t_int)
}

fn retention_at(spec: &PlatformSpec, t: f64) -> Result<f64> {
    let c = PhysicalConstants::STANDARD;
    let sv = thermal_sigma_v(spec.t_src, c.m_rb87)?;
    fullstate_retention(c.g_standard, t, sv)
}

/// Free-fall retention of the minimum-uncertainty Gaussian with the
/// platform's velocity scale.
pub fn freefall_proxy_retention(spec: &PlatformSpec, t: f64) -> Result<f64> {
    let c = PhysicalConstants::STANDARD;
    let sv = thermal_sigma_v(spec.t_src, c.m_rb87)?;
    let probe = GaussianProbe::new(gaussian_width_proxy(sv, c.m_rb87)?, c.m_rb87, c.hbar)?;
    freefall::retention(&probe, c.g_standard, t)
}

/// `α(R0) = √(R0/(1 − R0))`.
pub fn alpha(r0: f64) -> Result<f64> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InvalidTarget(r0));
    }
    Ok((r0 / (1.0 - r0)).sqrt())
}

/// Velocity spread `α(R0)·g·T` needed for retention `r0`.
pub fn required_sigma_v(r0: f64, t_int: f64) -> Result<f64> {
    let a = alpha(r0)?;
    require_positive("t_int", t_int)?;
    Ok(a * PhysicalConstants::STANDARD.g_standard * t_int)
}

/// Heisenberg-saturating localization `ħ/(2m·α(R0)·g·T)`.
pub fn localization_bound(r0: f64, t_int: f64, mass: f64) -> Result<f64> {
    let c = PhysicalConstants::STANDARD;
    let a = alpha(r0)?;
    require_positive("t_int", t_int)?;
    require_positive("mass", mass)?;
    Ok(c.hbar / (2.0 * mass * a * c.g_standard * t_int))
}

/// Row of the constrained-regime figure table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub platform: String,
    #[serde(rename = "t_src_K")]
    pub t_src_k: f64,
    pub sigma_v_mps: f64,
    pub t_int_s: f64,
    pub retention_kc: f64,
    pub retention_freefall_proxy: f64,
    pub caveat: String,
    /// `curve` for sweep points, `marker` for the platform's own time.
    pub kind: String,
}

/// Both retention laws for every platform along `t_grid`, followed by one
/// marker row per platform at its interrogation time.
pub fn figure3_table(platforms: &[PlatformSpec], t_grid: &[f64]) -> Result<Vec<Fig3Row>> {
    let m = PhysicalConstants::STANDARD.m_rb87;
    let row = |p: &PlatformSpec, t: f64, kind: &str| -> Result<Fig3Row> {
        Ok(Fig3Row {
            platform: p.label.clone(),
            t_src_k: p.t_src,
            sigma_v_mps: thermal_sigma_v(p.t_src, m)?,
            t_int_s: t,
            retention_kc: retention_at(p, t)?,
            retention_freefall_proxy: freefall_proxy_retention(p, t)?,
            caveat: if p.caveat { p.notes.clone() } else { String::new() },
            kind: kind.to_string(),
        })
    };
    let mut rows = Vec::with_capacity(platforms.len() * (t_grid.len() + 1));
    for p in platforms {
        for &t in t_grid {
            rows.push(row(p, t, "curve")?);
        }
    }
    for p in platforms {
        rows.push(row(p, p.t_int, "marker")?);
    }
    Ok(rows)
}

/// Estimates and requirements for one baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub platform: String,
    #[serde(rename = "t_src_K")]
    pub t_src_k: f64,
    pub t_int_s: f64,
    pub sigma_v_mps: f64,
    pub g_t_mps: f64,
    pub retention_kc: f64,
    pub required_sigma_v_half_mps: f64,
    pub required_sigma_v_090_mps: f64,
    pub ratio_half: f64,
    pub ratio_090: f64,
    pub localization_half_pm: f64,
    pub localization_090_pm: f64,
    pub caveat: String,
}

pub fn baseline_row(p: &PlatformSpec) -> Result<BaselineRow> {
    let c = PhysicalConstants::STANDARD;
    let sv = thermal_sigma_v(p.t_src, c.m_rb87)?;
    let half = required_sigma_v(0.5, p.t_int)?;
    let ninety = required_sigma_v(0.9, p.t_int)?;
    Ok(BaselineRow {
        platform: p.label.clone(),
        t_src_k: p.t_src,
        t_int_s: p.t_int,
        sigma_v_mps: sv,
        g_t_mps: c.g_standard * p.t_int,
        retention_kc: retention_estimate(p)?,
        required_sigma_v_half_mps: half,
        required_sigma_v_090_mps: ninety,
        ratio_half: half / sv,
        ratio_090: ninety / sv,
        localization_half_pm: localization_bound(0.5, p.t_int, c.m_rb87)? * 1e12,
        localization_090_pm: localization_bound(0.9, p.t_int, c.m_rb87)? * 1e12,
        caveat: if p.caveat { p.notes.clone() } else { String::new() },
    })
}

pub fn baseline_table(platforms: &[PlatformSpec]) -> Result<Vec<BaselineRow>> {
    platforms.iter().map(baseline_row).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const M: f64 = PhysicalConstants::STANDARD.m_rb87;

    #[test]
    fn velocity_proxy() {
        let v = thermal_sigma_v(2e-6, M).unwrap();
        assert_relative_eq!(v, 1.38e-2, max_relative = 1e-2);
        assert_relative_eq!(thermal_sigma_v(8e-6, M).unwrap(), 2.0 * v, max_relative = 1e-14);
        assert_relative_eq!(thermal_sigma_v(7.5e-6, M).unwrap(), 3.75f64.sqrt() * v, max_relative = 1e-14);
        assert!(thermal_sigma_v(0.0, M).is_err());
    }

    #[test]
    fn width_proxy_round_trip() {
        let s = gaussian_width_proxy(1.38e-2, M).unwrap();
        assert_relative_eq!(s, 3.74e-8, max_relative = 5e-3);
        let h = PhysicalConstants::STANDARD.hbar;
        let var_p = h * h / (2.0 * s * s);
        assert_relative_eq!(var_p, (M * 1.38e-2).powi(2), max_relative = 1e-12);
        assert_relative_eq!(gaussian_width_proxy(2.76e-2, M).unwrap(), 0.5 * s, max_relative = 1e-14);
    }

    #[test]
    fn estimates() {
        assert_relative_eq!(retention_estimate(&aqg()).unwrap(), 5.5e-4, max_relative = 2e-2);
        assert_relative_eq!(retention_estimate(&gain()).unwrap(), 2.9e-5, max_relative = 5e-2);
        let mut p = aqg();
        p.t_int = 1e-12;
        assert_relative_eq!(retention_estimate(&p).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn requirements_and_bounds() {
        assert_eq!(alpha(0.5).unwrap(), 1.0);
        assert!(matches!(alpha(1.0), Err(Error::InvalidTarget(_))));
        assert!(required_sigma_v(0.0, 0.06).is_err());
        let b = localization_bound(0.5, 0.06, M).unwrap();
        let h = PhysicalConstants::STANDARD.hbar;
        assert_relative_eq!(b, h / (2.0 * M * 9.81 * 0.06), max_relative = 1e-14);
    }

    #[test]
    fn figure_shape() {
        let t: Vec<f64> = (1..=25).map(|i| 0.01 * i as f64).collect();
        let rows = figure3_table(&figure3_platforms(), &t).unwrap();
        assert_eq!(rows.len(), 5 * 26);
        for r in rows.iter().filter(|r| r.t_src_k >= 1e-6 && r.t_int_s > 0.1) {
            assert!(r.retention_kc < 1e-3, "{r:?}");
        }
        for r in rows.iter().filter(|r| r.t_src_k < 1e-7) {
            assert!(r.retention_freefall_proxy > 0.99, "{r:?}");
        }
        assert!(rows.iter().filter(|r| r.platform == "MIGA").all(|r| !r.caveat.is_empty()));
        let markers: Vec<f64> = rows.iter().filter(|r| r.kind == "marker").map(|r| r.t_int_s).collect();
        for m in [0.060, 0.100, 0.160, 0.250] {
            assert!(markers.contains(&m));
        }
    }

    proptest! {
        #[test]
        fn requirement_round_trip(r0 in 0.001f64..0.999, t in 0.001f64..1.0) {
            let sv = required_sigma_v(r0, t).unwrap();
            let back = fullstate_retention(9.81, t, sv).unwrap();
            prop_assert!((back - r0).abs() <= 1e-12 * r0);
        }

        #[test]
        fn monotone_in_time(t_src in 1e-8f64..1e-5, t in 0.001f64..0.5) {
            let p = PlatformSpec::new("x", t_src, t).unwrap();
            let a = retention_at(&p, t).unwrap();
            let b = retention_at(&p, 1.01 * t).unwrap();
            prop_assert!(b < a);
        }
    }
}
