//! Two-parameter information geometry over the ordered pair (g, t).
//!
//! The interrogation time `t` is a nuisance parameter. Gravity information
//! that survives once `t` is profiled out is the Schur complement of the
//! timing block, optionally regularized by independent timing information.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this a timing block (or any diagonal entry) is treated as singular.
pub const TOL_ABS: f64 = 1e-12;

/// Relative determinant slack allowed when checking positive semidefiniteness.
pub const PSD_TOL_REL: f64 = 1e-9;

/// Unit convention the entries of a [`FisherMatrix2`] are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    /// ħ = m = 1, lengths in units of the probe width.
    #[default]
    Natural,
    /// SI: f_gg in s⁴·m⁻², f_gt in s·m⁻¹, f_tt in s⁻².
    Si,
    /// Dimensionless time ωₘ·t and gravity in units of 1/A (optomechanics).
    Mechanical,
}

impl UnitSystem {
    pub fn label(self) -> &'static str {
        match self {
            UnitSystem::Natural => "natural(hbar=m=1)",
            UnitSystem::Si => "SI",
            UnitSystem::Mechanical => "mechanical(t=omega_m*t_phys)",
        }
    }
}

/// Symmetric 2×2 information matrix over (g, t).
///
/// Only the three independent entries are stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherMatrix2 {
    pub f_gg: f64,
    pub f_gt: f64,
    pub f_tt: f64,
    pub units: UnitSystem,
}

impl FisherMatrix2 {
    /// Builds a matrix after checking the diagonal signs and the determinant.
    pub fn new(f_gg: f64, f_gt: f64, f_tt: f64, units: UnitSystem) -> Result<Self> {
        for (name, v) in [("f_gg", f_gg), ("f_gt", f_gt), ("f_tt", f_tt)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        let scale = f_gg.abs().max(f_tt.abs()).max(f_gt.abs()).max(1.0);
        if f_gg < -TOL_ABS * scale {
            return Err(Error::InvalidParameter {
                name: "f_gg",
                value: f_gg,
                reason: "diagonal entry must be >= 0",
            });
        }
        if f_tt < -TOL_ABS * scale {
            return Err(Error::InvalidParameter {
                name: "f_tt",
                value: f_tt,
                reason: "diagonal entry must be >= 0",
            });
        }
        let m = Self {
            f_gg,
            f_gt,
            f_tt,
            units,
        };
        let det = m.det();
        if det < -PSD_TOL_REL * (f_gg * f_tt).abs() {
            return Err(Error::NotPositiveSemidefinite { det });
        }
        Ok(m)
    }

    pub fn natural(f_gg: f64, f_gt: f64, f_tt: f64) -> Result<Self> {
        Self::new(f_gg, f_gt, f_tt, UnitSystem::Natural)
    }

    pub fn det(&self) -> f64 {
        self.f_gg * self.f_tt - self.f_gt * self.f_gt
    }

    /// Multiplies every entry, e.g. for `N` independent repetitions.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            f_gg: self.f_gg * factor,
            f_gt: self.f_gt * factor,
            f_tt: self.f_tt * factor,
            units: self.units,
        }
    }

    /// Entry-wise maximum relative deviation from `other`, measured against
    /// the larger diagonal so that vanishing cross terms do not blow up.
    pub fn max_rel_diff(&self, other: &FisherMatrix2) -> f64 {
        let rel = |a: f64, b: f64, scale: f64| (a - b).abs() / scale.max(f64::MIN_POSITIVE);
        let s_gg = self.f_gg.abs().max(other.f_gg.abs());
        let s_tt = self.f_tt.abs().max(other.f_tt.abs());
        let s_gt = self.f_gt.abs().max(other.f_gt.abs()).max((s_gg * s_tt).sqrt() * 1e-12);
        rel(self.f_gg, other.f_gg, s_gg)
            .max(rel(self.f_tt, other.f_tt, s_tt))
            .max(rel(self.f_gt, other.f_gt, s_gt))
    }
}

impl FisherMatrix2 {
    /// Like [`FisherMatrix2::max_rel_diff`] but the cross term is measured
    /// against `√(f_gg·f_tt)`, its natural bound. Suited to convergence tests
    /// where the cross term may vanish.
    pub fn max_scaled_diff(&self, other: &FisherMatrix2) -> f64 {
        let s_gg = self.f_gg.abs().max(other.f_gg.abs()).max(f64::MIN_POSITIVE);
        let s_tt = self.f_tt.abs().max(other.f_tt.abs()).max(f64::MIN_POSITIVE);
        ((self.f_gg - other.f_gg).abs() / s_gg)
            .max((self.f_tt - other.f_tt).abs() / s_tt)
            .max((self.f_gt - other.f_gt).abs() / (s_gg * s_tt).sqrt())
    }
}

/// Independent Fisher information about the interrogation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorInfo {
    i_t_prior: f64,
}

impl PriorInfo {
    pub fn new(i_t_prior: f64) -> Result<Self> {
        if i_t_prior.is_nan() || i_t_prior < 0.0 {
            return Err(Error::InvalidParameter {
                name: "i_t_prior",
                value: i_t_prior,
                reason: "prior information must be >= 0",
            });
        }
        Ok(Self { i_t_prior })
    }

    /// `I = 1/ΔT²` for a timing resource of resolution `ΔT > 0`.
    pub fn from_timing_uncertainty(delta_t: f64) -> Result<Self> {
        if !(delta_t > 0.0) || delta_t.is_nan() {
            return Err(Error::InvalidParameter {
                name: "delta_t_prior",
                value: delta_t,
                reason: "timing uncertainty must be > 0",
            });
        }
        Ok(Self {
            i_t_prior: 1.0 / (delta_t * delta_t),
        })
    }

    pub fn none() -> Self {
        Self { i_t_prior: 0.0 }
    }

    /// Perfectly known interrogation time.
    pub fn perfect() -> Self {
        Self {
            i_t_prior: f64::INFINITY,
        }
    }

    pub fn information(&self) -> f64 {
        self.i_t_prior
    }

    /// Timing resolution `ΔT = I^{-1/2}` (infinite when no prior is supplied).
    pub fn timing_uncertainty(&self) -> f64 {
        1.0 / self.i_t_prior.sqrt()
    }
}

/// Gravity information after the interrogation time is profiled out:
/// `f_gg − f_gt²/f_tt`.
pub fn schur_effective(f: &FisherMatrix2) -> Result<f64> {
    if f.f_tt <= TOL_ABS {
        return Err(Error::DegenerateTimingBlock { f_tt: f.f_tt });
    }
    Ok(f.f_gg - f.f_gt * f.f_gt / f.f_tt)
}

/// Schur complement with additive prior timing information.
pub fn regularized_effective(f: &FisherMatrix2, prior: &PriorInfo) -> Result<f64> {
    let denom = f.f_tt + prior.i_t_prior;
    if denom <= TOL_ABS {
        if f.f_gt.abs() <= TOL_ABS {
            return Ok(f.f_gg);
        }
        return Err(Error::DegenerateTimingBlock { f_tt: f.f_tt });
    }
    if denom.is_infinite() {
        return Ok(f.f_gg);
    }
    Ok(f.f_gg - f.f_gt * f.f_gt / denom)
}

/// Squared gravity–time correlation `ρ² = f_gt²/(f_gg·f_tt)`.
pub fn correlation(f: &FisherMatrix2) -> Result<f64> {
    if f.f_gg <= TOL_ABS || f.f_tt <= TOL_ABS {
        return Err(Error::DegenerateBlock {
            f_gg: f.f_gg,
            f_tt: f.f_tt,
        });
    }
    Ok(f.f_gt * f.f_gt / (f.f_gg * f.f_tt))
}

/// Fraction of single-parameter gravity information retained after profiling.
pub fn retention(f: &FisherMatrix2) -> Result<f64> {
    if f.f_gg <= TOL_ABS {
        return Err(Error::DegenerateBlock {
            f_gg: f.f_gg,
            f_tt: f.f_tt,
        });
    }
    Ok(schur_effective(f)? / f.f_gg)
}

/// Local Cramér–Rao variance bound `1/(N·F_eff)`.
pub fn crlb_variance(f_eff: f64, n_repetitions: u64) -> Result<f64> {
    if !(f_eff > 0.0) {
        return Err(Error::NonpositiveInformation(f_eff));
    }
    if n_repetitions == 0 {
        return Err(Error::InvalidParameter {
            name: "n_repetitions",
            value: 0.0,
            reason: "need at least one repetition",
        });
    }
    Ok(1.0 / (n_repetitions as f64 * f_eff))
}
