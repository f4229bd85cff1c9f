//! Closed-unitary optomechanical benchmark in dimensionless mechanical units.
//!
//! Hamiltonian (in units of ħωₘ, time `t = ωₘ·t_phys`):
//!
//! ```text
//! H = −δ·n_a + n_b − k̄·n_a·X + A·g·X,      X = b + b†
//! ```
//!
//! The optical mode starts in a coherent state with mean photon number `μ`,
//! the mechanical mode in a coherent state of amplitude `β = β_R + iβ_I`.
//! Gravity enters only through `A·g`, so `g` is measured in units of `1/A`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_nonnegative, require_positive, Error, Result};
use crate::estimation::{correlation, FisherMatrix2, UnitSystem};
use crate::kernel::{AxisParams, KernelParams};
use crate::oracle::fock::FockModel;

/// Dimensionless mechanical time `ωₘ·t_phys`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MechTime(pub f64);

impl MechTime {
    pub fn from_physical(t_phys: f64, omega_m: f64) -> Self {
        Self(t_phys * omega_m)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Revival time `2πn`.
    pub fn revival(n: u32) -> Self {
        Self(2.0 * std::f64::consts::PI * n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptoConfig {
    pub kbar: f64,
    pub mu: f64,
    pub beta_r: f64,
    pub beta_i: f64,
    pub delta: f64,
    pub a_coef: f64,
    /// Mechanical Fock levels kept by the oracle.
    pub fock_dim: usize,
    /// Largest photon number kept by the oracle.
    pub photon_max: usize,
}

impl OptoConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kbar: f64,
        mu: f64,
        beta_r: f64,
        beta_i: f64,
        delta: f64,
        a_coef: f64,
        fock_dim: usize,
        photon_max: usize,
    ) -> Result<Self> {
        require_finite("kbar", kbar)?;
        require_nonnegative("mu", mu)?;
        require_finite("beta_r", beta_r)?;
        require_finite("beta_i", beta_i)?;
        require_finite("delta", delta)?;
        require_positive("a_coef", a_coef)?;
        if fock_dim < 2 {
            return Err(Error::InvalidParameter {
                name: "fock_dim",
                value: fock_dim as f64,
                reason: "need at least two mechanical levels",
            });
        }
        Ok(Self {
            kbar,
            mu,
            beta_r,
            beta_i,
            delta,
            a_coef,
            fock_dim,
            photon_max,
        })
    }

    /// Picks truncations large enough for gravities up to `|g| ≤ g_max`.
    ///
    /// The photon cutoff keeps the Poisson tail of the optical state below
    /// 1e-8; the mechanical cutoff covers the largest displaced coherent
    /// orbit reached in any kept photon block.
    pub fn with_auto_truncation(
        kbar: f64,
        mu: f64,
        beta_r: f64,
        beta_i: f64,
        delta: f64,
        a_coef: f64,
        g_max: f64,
    ) -> Result<Self> {
        let photon_max = (mu + 8.0 * mu.sqrt() + 12.0).ceil() as usize;
        let beta = beta_r.hypot(beta_i);
        let shift = kbar.abs() * photon_max as f64 + a_coef * g_max.abs();
        let r = 2.0 * shift + beta;
        let fock_dim = (r * r + 12.0 * r + 40.0).ceil() as usize;
        Self::new(kbar, mu, beta_r, beta_i, delta, a_coef, fock_dim, photon_max)
    }

    /// Same config with the detuning tuned to `δ = −2k̄β_R`.
    pub fn tuned(mut self) -> Self {
        self.delta = tuned_delta(&self);
        self
    }
}

fn zeta(t: f64) -> f64 {
    t - t.sin()
}

/// Closed-form gravity–time cross term as quoted for the benchmark:
///
/// `A·[−16k̄²μ·ζ(t)(1−cos t)β_R + 2(−sin t·(k̄μ − A·g − β_R) + (1−cos t)·β_I)]`
/// with `ζ(t) = t − sin t`.
pub fn cross_term(cfg: &OptoConfig, g: f64, t: MechTime) -> f64 {
    let t = t.0;
    let (s, omc) = (t.sin(), 1.0 - t.cos());
    let a = cfg.a_coef;
    a * (-16.0 * cfg.kbar * cfg.kbar * cfg.mu * zeta(t) * omc * cfg.beta_r
        + 2.0 * (-s * (cfg.kbar * cfg.mu - a * g - cfg.beta_r) + omc * cfg.beta_i))
}

/// `(d0, d1)` of the quoted cross term, `d1 = 2A²·sin t`.
pub fn affine_coeffs(cfg: &OptoConfig, t: MechTime) -> (f64, f64) {
    (
        cross_term(cfg, 0.0, t),
        2.0 * cfg.a_coef * cfg.a_coef * t.0.sin(),
    )
}

/// Detuning that removes the photon-number channel from the timing block.
pub fn tuned_delta(cfg: &OptoConfig) -> f64 {
    -2.0 * cfg.kbar * cfg.beta_r
}

/// Dictionary axis pair: `g_c = (k̄μ − β_R)/A`,
/// `g_* = √(β_I² + k̄²μ + μ(δ + 2k̄β_R)²)/A`.
pub fn axis_params(cfg: &OptoConfig) -> Result<AxisParams> {
    let tune = cfg.delta + 2.0 * cfg.kbar * cfg.beta_r;
    let arg = cfg.beta_i * cfg.beta_i + cfg.kbar * cfg.kbar * cfg.mu + cfg.mu * tune * tune;
    if arg <= 1e-12 {
        return Err(Error::DegenerateAxis {
            g_star_sq: arg / (cfg.a_coef * cfg.a_coef),
        });
    }
    AxisParams::new(
        (cfg.kbar * cfg.mu - cfg.beta_r) / cfg.a_coef,
        arg.sqrt() / cfg.a_coef,
    )
}

/// QFIM from the moment algebra of the coherent⊗coherent input.
///
/// Uses the Heisenberg solution
/// `X(s) = cos s·X + sin s·P + 2(k̄·n_a − A·g)(1 − cos s)` with
/// `P = i(b† − b)`. These forms are cross-checked against the Fock oracle.
pub fn moment_qfim(cfg: &OptoConfig, g: f64, t: MechTime) -> Result<FisherMatrix2> {
    let p = moment_kernel_params(cfg, t)?;
    FisherMatrix2::new(
        p.f_gg,
        p.d0 + p.d1 * g,
        p.c0 + p.c1 * g + p.c2 * g * g,
        UnitSystem::Mechanical,
    )
}

/// Kernel coefficients from the moment algebra (see [`moment_qfim`]).
pub fn moment_kernel_params(cfg: &OptoConfig, t: MechTime) -> Result<KernelParams> {
    let t = t.0;
    let (s, omc, z) = (t.sin(), 1.0 - t.cos(), zeta(t));
    let (k, mu, br, bi, a) = (cfg.kbar, cfg.mu, cfg.beta_r, cfg.beta_i, cfg.a_coef);
    let tune = cfg.delta + 2.0 * k * br;
    let c0 = 4.0 * (tune * tune * mu + (br - k * mu).powi(2) + bi * bi + k * k * mu);
    let c1 = 8.0 * a * (br - k * mu);
    let c2 = 4.0 * a * a;
    let d0 = 4.0 * a * (-s * (k * mu - br) + omc * bi - 2.0 * k * mu * z * tune);
    let d1 = 4.0 * a * a * s;
    let f_gg = 4.0 * a * a * (s * s + omc * omc + 4.0 * k * k * z * z * mu);
    KernelParams::new(c0, c1, c2, d0, d1, f_gg, t)
}

/// One cell of the optomechanical correlation field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldCell {
    pub u: f64,
    pub t: f64,
    pub g: f64,
    pub rho2: f64,
    pub retention: f64,
    /// `R^{-1/2} − 1`.
    pub degradation: f64,
}

/// `ρ²(u, t)` with every QFIM entry taken from the truncated-Fock oracle.
///
/// One spectral system is built per `u` column and reused for every `t`.
/// Cells are returned in row-major order (`t` outer, `u` inner).
pub fn correlation_field(cfg: &OptoConfig, u_grid: &[f64], t_grid: &[f64]) -> Result<Vec<FieldCell>> {
    let axis = axis_params(cfg)?;
    let model = FockModel::from_config(cfg)?;
    let columns: Vec<Vec<FieldCell>> = u_grid
        .par_iter()
        .map(|&u| {
            let g = axis.gravity_at(u);
            let system = model.spectral_system(g);
            t_grid
                .iter()
                .map(|&t| {
                    let f = system.qfim(MechTime(t))?;
                    let rho2 = correlation(&f)?;
                    let retention = (1.0 - rho2).max(0.0);
                    Ok(FieldCell {
                        u,
                        t,
                        g,
                        rho2,
                        retention,
                        degradation: retention.powf(-0.5) - 1.0,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..t_grid.len())
        .flat_map(|j| columns.iter().map(move |c| c[j]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::axis_from_quadratic;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cfg() -> OptoConfig {
        OptoConfig::new(0.05, 1.0, 0.1, 0.05, 0.3, 0.7, 40, 12).unwrap()
    }

    #[test]
    fn revivals_of_quoted_cross_term() {
        let c = cfg();
        for n in 1..=3 {
            let t = MechTime::revival(n);
            let v = cross_term(&c, 0.4, t);
            assert!(v.abs() <= 1e-12 * c.a_coef * c.a_coef, "{v}");
            let (d0, d1) = affine_coeffs(&c, t);
            assert!(d0.abs() < 1e-12 && d1.abs() < 1e-12);
        }
    }

    #[test]
    fn bare_gravity_term() {
        let c = OptoConfig::new(0.3, 0.0, 0.0, 0.0, 0.1, 1.3, 10, 0).unwrap();
        let t = MechTime(0.9);
        assert_relative_eq!(
            cross_term(&c, 0.7, t),
            2.0 * 1.3 * 1.3 * 0.7 * 0.9f64.sin(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn affine_structure() {
        let c = cfg();
        let t = MechTime(PI / 2.0);
        let (d0, d1) = affine_coeffs(&c, t);
        assert_relative_eq!(d1, 2.0 * c.a_coef * c.a_coef, max_relative = 1e-15);
        assert!((cross_term(&c, 2.0, t) - cross_term(&c, 0.0, t) - 2.0 * d1).abs() < 1e-14);
        assert_eq!(cross_term(&c, 0.0, t), d0);
    }

    #[test]
    fn dictionary_axis() {
        let c = OptoConfig::new(0.2, 4.0, 0.0, 0.0, 0.0, 2.0, 10, 10).unwrap();
        let a = axis_params(&c).unwrap();
        assert_relative_eq!(a.g_c(), 0.4);
        assert_relative_eq!(a.g_star(), 0.2 * 2.0 / 2.0);
        let tuned = OptoConfig::new(0.2, 4.0, 0.1, 0.0, 5.0, 2.0, 10, 10).unwrap().tuned();
        assert_relative_eq!(tuned.delta, -0.04);
        let a = axis_params(&tuned).unwrap();
        assert_relative_eq!(a.g_star(), 0.2 * 2.0 / 2.0, max_relative = 1e-14);
        let flat = OptoConfig::new(0.2, 0.0, 0.1, 0.0, 0.0, 1.0, 10, 10).unwrap();
        assert!(matches!(axis_params(&flat), Err(Error::DegenerateAxis { .. })));
    }

    #[test]
    fn moment_axis_matches_dictionary() {
        let c = cfg();
        let p = moment_kernel_params(&c, MechTime(1.1)).unwrap();
        let from_moments = axis_from_quadratic(&p).unwrap();
        let dict = axis_params(&c).unwrap();
        assert_relative_eq!(from_moments.g_c(), dict.g_c(), max_relative = 1e-12);
        assert_relative_eq!(from_moments.g_star(), dict.g_star(), max_relative = 1e-12);
    }

    #[test]
    fn moment_cross_term_revivals_need_tuning() {
        let c = cfg();
        let t = MechTime::revival(1);
        assert!(moment_qfim(&c, 0.2, t).unwrap().f_gt.abs() > 1e-3);
        let f = moment_qfim(&c.tuned(), 0.2, t).unwrap();
        assert!(f.f_gt.abs() < 1e-12);
    }

    #[test]
    fn auto_truncation_grows_with_coupling() {
        let small = OptoConfig::with_auto_truncation(0.05, 1.0, 0.1, 0.0, 0.0, 1.0, 1.0).unwrap();
        let big = OptoConfig::with_auto_truncation(0.2, 4.0, 0.1, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(big.fock_dim > small.fock_dim && big.photon_max > small.photon_max);
    }

    proptest! {
        #[test]
        fn exact_affinity(g in -5.0f64..5.0, t in 0.0f64..20.0) {
            let c = cfg();
            let t = MechTime(t);
            let second = cross_term(&c, g + 1.0, t) - 2.0 * cross_term(&c, g, t) + cross_term(&c, g - 1.0, t);
            prop_assert!(second.abs() < 1e-12);
        }

        #[test]
        fn moment_rho2_independent_of_a(u in -1.0f64..1.0, t in 0.2f64..12.0, a in 0.1f64..5.0) {
            let base = cfg().tuned();
            let scaled = OptoConfig { a_coef: a, ..base };
            let rho = |c: &OptoConfig| {
                let g = axis_params(c).unwrap().gravity_at(u);
                correlation(&moment_qfim(c, g, MechTime(t)).unwrap()).unwrap()
            };
            prop_assert!((rho(&base) - rho(&scaled)).abs() < 1e-10);
        }
    }
}
