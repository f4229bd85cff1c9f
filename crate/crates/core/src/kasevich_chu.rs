//! Three-pulse π/2–π–π/2 light-pulse interferometer.
//!
//! All quantities are SI. The internal-only readout is evaluated at mid-fringe
//! (phase information `C²`); other operating points are not modelled.

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_nonnegative, require_positive, Error, Result};
use crate::estimation::{FisherMatrix2, PriorInfo, UnitSystem};
use crate::kernel::KernelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KCConfig {
    pub k0: f64,
    /// Pulse separation `T`.
    pub t: f64,
    pub contrast: f64,
    pub g: f64,
    pub sigma_v: f64,
    pub n_atoms: u64,
    pub phi_ctrl: f64,
}

impl KCConfig {
    pub fn new(
        k0: f64,
        t: f64,
        contrast: f64,
        g: f64,
        sigma_v: f64,
        n_atoms: u64,
        phi_ctrl: f64,
    ) -> Result<Self> {
        require_positive("k0", k0)?;
        require_positive("T", t)?;
        require_finite("g", g)?;
        require_nonnegative("sigma_v", sigma_v)?;
        require_finite("phi_ctrl", phi_ctrl)?;
        if !(0.0..=1.0).contains(&contrast) {
            return Err(Error::InvalidParameter {
                name: "contrast",
                value: contrast,
                reason: "must lie in [0, 1]",
            });
        }
        if n_atoms == 0 {
            return Err(Error::InvalidParameter {
                name: "n_atoms",
                value: 0.0,
                reason: "need at least one atom",
            });
        }
        Ok(Self {
            k0,
            t,
            contrast,
            g,
            sigma_v,
            n_atoms,
            phi_ctrl,
        })
    }

    /// Ideal single-atom config with unit contrast and no control phase.
    pub fn ideal(k0: f64, t: f64, g: f64, sigma_v: f64) -> Result<Self> {
        Self::new(k0, t, 1.0, g, sigma_v, 1, 0.0)
    }

    pub fn with_phi_ctrl(mut self, phi_ctrl: f64) -> Self {
        self.phi_ctrl = phi_ctrl;
        self
    }
}

/// `ΔΦ = −k0·g·T² − φ_ctrl`.
pub fn delta_phi(cfg: &KCConfig) -> f64 {
    -cfg.k0 * cfg.g * cfg.t * cfg.t - cfg.phi_ctrl
}

/// Bright-port population `½[1 − C·cos ΔΦ]`.
pub fn fringe_probability(cfg: &KCConfig) -> f64 {
    0.5 * (1.0 - cfg.contrast * delta_phi(cfg).cos())
}

/// Classical Fisher matrix of the population readout at mid-fringe.
///
/// It is the outer product of `C·(∂_g ΔΦ, ∂_T ΔΦ)` and therefore rank one.
pub fn internal_fisher(cfg: &KCConfig) -> Result<FisherMatrix2> {
    let a = cfg.contrast * cfg.k0 * cfg.t * cfg.t;
    let b = 2.0 * cfg.contrast * cfg.k0 * cfg.g * cfg.t;
    FisherMatrix2::new(a * a, a * b, b * b, UnitSystem::Si)
}

/// `C²k0²T⁴ / (1 + 4C²k0²g²T²·ΔT²)` with `ΔT² = 1/I_prior`.
pub fn internal_effective_regularized(cfg: &KCConfig, prior: &PriorInfo) -> Result<f64> {
    let ck = cfg.contrast * cfg.k0;
    let ideal = ck * ck * cfg.t.powi(4);
    let coupling = 4.0 * ck * ck * cfg.g * cfg.g * cfg.t * cfg.t;
    let info = prior.information();
    if info.is_infinite() || coupling == 0.0 {
        return Ok(ideal);
    }
    if info <= 0.0 {
        return Err(Error::SingularWithoutPrior {
            g: cfg.g,
            prior: info,
        });
    }
    Ok(ideal / (1.0 + coupling / info))
}

/// Full-state QFIM of `n_atoms` independent atoms under ideal closure.
pub fn fullstate_qfim(cfg: &KCConfig) -> Result<FisherMatrix2> {
    let n = cfg.n_atoms as f64;
    let k2 = cfg.k0 * cfg.k0;
    let (g, t, sv) = (cfg.g, cfg.t, cfg.sigma_v);
    FisherMatrix2::new(
        n * k2 * t.powi(4),
        n * 2.0 * k2 * g * t.powi(3),
        n * 4.0 * k2 * (g * g * t * t + sv * sv),
        UnitSystem::Si,
    )
}

/// `N·k0²T⁴·σ_v²/(σ_v² + g²T²)`.
pub fn fullstate_effective(cfg: &KCConfig) -> Result<f64> {
    let gt = cfg.g * cfg.t;
    let s2 = cfg.sigma_v * cfg.sigma_v;
    if s2 == 0.0 && gt == 0.0 {
        return Err(Error::DegenerateTimingBlock { f_tt: 0.0 });
    }
    let n = cfg.n_atoms as f64;
    Ok(n * cfg.k0 * cfg.k0 * cfg.t.powi(4) * s2 / (s2 + gt * gt))
}

/// `σ_v²/(σ_v² + g²T²)`.
pub fn fullstate_retention(g: f64, t: f64, sigma_v: f64) -> Result<f64> {
    require_nonnegative("sigma_v", sigma_v)?;
    require_finite("g", g)?;
    require_finite("T", t)?;
    let s2 = sigma_v * sigma_v;
    let gt2 = (g * t) * (g * t);
    if s2 == 0.0 && gt2 == 0.0 {
        return Err(Error::Indeterminate);
    }
    Ok(s2 / (s2 + gt2))
}

/// Kernel coefficients of the full-state geometry: `g_* = σ_v/T`, `α = (0, 1)`.
pub fn fullstate_kernel_params(cfg: &KCConfig) -> Result<KernelParams> {
    let n = cfg.n_atoms as f64;
    let k2 = cfg.k0 * cfg.k0;
    let t = cfg.t;
    KernelParams::new(
        n * 4.0 * k2 * cfg.sigma_v * cfg.sigma_v,
        0.0,
        n * 4.0 * k2 * t * t,
        0.0,
        n * 2.0 * k2 * t.powi(3),
        n * k2 * t.powi(4),
        t,
    )
}

/// Kernel coefficients of the internal readout regularized by a timing prior:
/// `g_* = 1/(2·C·k0·T·ΔT)`, `α = (0, 1)`.
pub fn internal_kernel_params(cfg: &KCConfig, prior: &PriorInfo) -> Result<KernelParams> {
    let ck2 = (cfg.contrast * cfg.k0).powi(2);
    let t = cfg.t;
    KernelParams::new(
        prior.information(),
        0.0,
        4.0 * ck2 * t * t,
        0.0,
        2.0 * ck2 * t.powi(3),
        ck2 * t.powi(4),
        t,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{regularized_effective, retention, schur_effective};
    use crate::kernel::{axis_from_quadratic, normalized_coeffs, retention_kernel, u_coordinate};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit(sigma_v: f64) -> KCConfig {
        KCConfig::ideal(1.0, 1.0, 1.0, sigma_v).unwrap()
    }

    #[test]
    fn phase_and_fringe() {
        let c = KCConfig::ideal(1.0, 2.0, 1.0, 0.0).unwrap();
        assert_eq!(delta_phi(&c), -4.0);
        let dark = KCConfig::ideal(1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(fringe_probability(&dark), 0.0);
        let bright = dark.with_phi_ctrl(std::f64::consts::PI);
        assert_relative_eq!(fringe_probability(&bright), 1.0);
    }

    #[test]
    fn phase_derivatives() {
        let c = KCConfig::ideal(3.0, 0.7, 2.0, 0.0).unwrap().with_phi_ctrl(0.4);
        let h = 1e-6;
        let at = |g: f64, t: f64| delta_phi(&KCConfig { g, t, ..c });
        let dg = (at(c.g + h, c.t) - at(c.g - h, c.t)) / (2.0 * h);
        let dt = (at(c.g, c.t + h) - at(c.g, c.t - h)) / (2.0 * h);
        assert_relative_eq!(dg, -c.k0 * c.t * c.t, max_relative = 1e-8);
        assert_relative_eq!(dt, -2.0 * c.k0 * c.g * c.t, max_relative = 1e-8);
    }

    #[test]
    fn internal_reference() {
        let f = internal_fisher(&unit(0.0)).unwrap();
        assert_eq!((f.f_gg, f.f_gt, f.f_tt), (1.0, 2.0, 4.0));
        assert_eq!(f.det(), 0.0);
        let z = internal_fisher(&KCConfig::ideal(2.0, 1.5, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!((z.f_gt, z.f_tt), (0.0, 0.0));
        assert_relative_eq!(z.f_gg, 4.0 * 1.5f64.powi(4));
    }

    #[test]
    fn internal_regularized_reference() {
        let c = unit(0.0);
        let p = PriorInfo::from_timing_uncertainty(0.5).unwrap();
        assert_relative_eq!(internal_effective_regularized(&c, &p).unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(internal_effective_regularized(&c, &PriorInfo::perfect()).unwrap(), 1.0);
        assert!(matches!(
            internal_effective_regularized(&c, &PriorInfo::none()),
            Err(Error::SingularWithoutPrior { .. })
        ));
        let g0 = KCConfig::ideal(1.0, 2.0, 0.0, 0.0).unwrap();
        assert_eq!(internal_effective_regularized(&g0, &PriorInfo::none()).unwrap(), 16.0);
    }

    #[test]
    fn fullstate_reference() {
        let f = fullstate_qfim(&unit(1.0)).unwrap();
        assert_eq!((f.f_gg, f.f_gt, f.f_tt), (1.0, 2.0, 8.0));
        assert_eq!(f.det(), 4.0);
        assert_eq!(fullstate_effective(&unit(1.0)).unwrap(), 0.5);
        let rank1 = fullstate_qfim(&unit(0.0)).unwrap();
        assert_eq!(rank1.det(), 0.0);
        let g0 = KCConfig::ideal(2.0, 1.0, 0.0, 0.3).unwrap();
        assert_relative_eq!(fullstate_effective(&g0).unwrap(), 4.0);
        let half = KCConfig::ideal(2.0, 0.5, 2.0, 1.0).unwrap();
        assert_relative_eq!(fullstate_effective(&half).unwrap(), 0.5 * 4.0 * 0.0625);
        assert!(fullstate_effective(&KCConfig::ideal(1.0, 1.0, 0.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn fullstate_retention_reference() {
        assert!(fullstate_retention(9.81, 0.1, 1e3).unwrap() > 0.999);
        assert_relative_eq!(fullstate_retention(9.81, 0.06, 1.38e-2).unwrap(), 5.5e-4, max_relative = 0.02);
        assert_relative_eq!(fullstate_retention(9.81, 0.26, 1.38e-2).unwrap(), 2.9e-5, max_relative = 0.05);
        assert_eq!(fullstate_retention(0.0, 1.0, 0.0), Err(Error::Indeterminate));
    }

    #[test]
    fn kernel_rows() {
        let c = KCConfig::new(1.6e7, 0.1, 1.0, 9.81, 0.013, 1000, 0.0).unwrap();
        let p = fullstate_kernel_params(&c).unwrap();
        let a = axis_from_quadratic(&p).unwrap();
        assert_eq!(a.g_c(), 0.0);
        assert_relative_eq!(a.g_star(), 0.13, max_relative = 1e-12);
        let n = normalized_coeffs(&p, &a).unwrap();
        assert_relative_eq!(n.alpha0, 0.0);
        assert_relative_eq!(n.alpha1, 1.0, max_relative = 1e-12);
        let u = u_coordinate(c.g, &a);
        assert_relative_eq!(
            retention_kernel(&n, u).unwrap(),
            fullstate_retention(c.g, c.t, c.sigma_v).unwrap(),
            max_relative = 1e-9
        );

        let c = KCConfig::new(2.0, 1.5, 0.8, 1.2, 0.0, 1, 0.0).unwrap();
        let prior = PriorInfo::from_timing_uncertainty(0.1).unwrap();
        let p = internal_kernel_params(&c, &prior).unwrap();
        let a = axis_from_quadratic(&p).unwrap();
        assert_relative_eq!(a.g_star(), 1.0 / (2.0 * 0.8 * 2.0 * 1.5 * 0.1), max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn closed_forms_match_profiling(
            k0 in 0.5f64..5.0, t in 0.1f64..3.0, c in 0.1f64..1.0,
            g in -3.0f64..3.0, sv in 0.05f64..3.0, n in 1u64..100, dt in 0.01f64..2.0,
        ) {
            let cfg = KCConfig::new(k0, t, c, g, sv, n, 0.0).unwrap();
            let fi = internal_fisher(&cfg).unwrap();
            prop_assert!(fi.det().abs() <= 1e-12 * fi.f_gg * fi.f_tt);
            let prior = PriorInfo::from_timing_uncertainty(dt).unwrap();
            let a = internal_effective_regularized(&cfg, &prior).unwrap();
            let b = regularized_effective(&fi, &prior).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300) + 1e-14 * fi.f_gg);
            let ff = fullstate_qfim(&cfg).unwrap();
            let e = fullstate_effective(&cfg).unwrap();
            prop_assert!((e - schur_effective(&ff).unwrap()).abs() <= 1e-12 * ff.f_gg);
            prop_assert!((retention(&ff).unwrap() - fullstate_retention(g, t, sv).unwrap()).abs() < 1e-12);
        }
    }
}
