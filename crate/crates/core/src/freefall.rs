//! Centered minimum-uncertainty Gaussian in a uniform gravitational field,
//! `H = p²/2m + m·g·z`.

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Result};
use crate::estimation::{FisherMatrix2, UnitSystem};
use crate::kernel::KernelParams;

/// Wavepacket `ψ(z) ∝ exp(−z²/(2σ²))` with mass `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianProbe {
    sigma: f64,
    mass: f64,
    hbar: f64,
}

impl GaussianProbe {
    pub fn new(sigma: f64, mass: f64, hbar: f64) -> Result<Self> {
        Ok(Self {
            sigma: require_positive("sigma", sigma)?,
            mass: require_positive("mass", mass)?,
            hbar: require_positive("hbar", hbar)?,
        })
    }

    /// ħ = m = 1.
    pub fn natural(sigma: f64) -> Result<Self> {
        Self::new(sigma, 1.0, 1.0)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn var_z(&self) -> f64 {
        0.5 * self.sigma * self.sigma
    }

    pub fn var_p(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.sigma * self.sigma)
    }

    pub fn cov_zp(&self) -> f64 {
        0.0
    }

    /// Unit tag: natural when ħ = m = 1, SI otherwise.
    pub fn units(&self) -> UnitSystem {
        if self.hbar == 1.0 && self.mass == 1.0 {
            UnitSystem::Natural
        } else {
            UnitSystem::Si
        }
    }

    /// `2m²σ²/ħ²`, the timing curvature `c2`.
    fn curvature(&self) -> f64 {
        let r = self.mass * self.sigma / self.hbar;
        2.0 * r * r
    }
}

fn check_time(t: f64) -> Result<f64> {
    require_nonnegative("t", t)
}

/// Exact QFIM over (g, t).
pub fn qfim(probe: &GaussianProbe, g: f64, t: f64) -> Result<FisherMatrix2> {
    let p = kernel_params(probe, t)?;
    FisherMatrix2::new(
        p.f_gg,
        p.d1 * g,
        p.c0 + p.c2 * g * g,
        probe.units(),
    )
}

/// Lorentzian width `g_* = ħ²/(2m²σ³)`.
pub fn lorentz_scale(probe: &GaussianProbe) -> f64 {
    let h = probe.hbar / probe.mass;
    h * h / (2.0 * probe.sigma.powi(3))
}

/// `S(g) = 1/(1 + (g/g_*)²)`.
pub fn lorentz_factor(probe: &GaussianProbe, g: f64) -> f64 {
    let x = g / lorentz_scale(probe);
    1.0 / (1.0 + x * x)
}

/// Profiled gravity information `t⁴/(2σ²) + (2m²σ²t²/ħ²)·S(g)`.
pub fn effective_info(probe: &GaussianProbe, g: f64, t: f64) -> Result<f64> {
    let t = check_time(t)?;
    let t2 = t * t;
    Ok(t2 * t2 / (2.0 * probe.sigma * probe.sigma)
        + probe.curvature() * t2 * lorentz_factor(probe, g))
}

/// Kernel coefficients at time `t`.
pub fn kernel_params(probe: &GaussianProbe, t: f64) -> Result<KernelParams> {
    let t = check_time(t)?;
    let c2 = probe.curvature();
    let h = probe.hbar / probe.mass;
    let c0 = h * h / (2.0 * probe.sigma.powi(4));
    let t2 = t * t;
    KernelParams::new(
        c0,
        0.0,
        c2,
        0.0,
        c2 * t,
        t2 * t2 / (2.0 * probe.sigma * probe.sigma) + c2 * t2,
        t,
    )
}

/// Retained fraction `F_eff/F_gg`; at `t = 0` this is the limit `S(g)`.
pub fn retention(probe: &GaussianProbe, g: f64, t: f64) -> Result<f64> {
    let t = check_time(t)?;
    let a = t * t / (2.0 * probe.sigma * probe.sigma);
    let b = probe.curvature();
    Ok((a + b * lorentz_factor(probe, g)) / (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{correlation, schur_effective};
    use crate::kernel::{axis_from_quadratic, normalized_coeffs};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit() -> GaussianProbe {
        GaussianProbe::natural(1.0).unwrap()
    }

    #[test]
    fn qfim_reference_points() {
        let f = qfim(&unit(), 0.0, 1.0).unwrap();
        assert_eq!((f.f_gg, f.f_gt, f.f_tt), (2.5, 0.0, 0.5));
        let f = qfim(&unit(), 1.0, 2.0).unwrap();
        assert_eq!((f.f_gg, f.f_gt, f.f_tt), (16.0, 4.0, 2.5));
    }

    #[test]
    fn zero_time() {
        let f = qfim(&unit(), 2.0, 0.0).unwrap();
        assert_eq!((f.f_gg, f.f_gt, f.f_tt), (0.0, 0.0, 0.5 + 2.0 * 4.0));
        assert_relative_eq!(retention(&unit(), 1.0, 0.0).unwrap(), 0.2);
        assert!(qfim(&unit(), 0.0, -1.0).is_err());
    }

    #[test]
    fn effective_info_reference() {
        assert_relative_eq!(effective_info(&unit(), 1.0, 2.0).unwrap(), 9.6, max_relative = 1e-15);
        assert_relative_eq!(effective_info(&unit(), 0.0, 1.3).unwrap(), qfim(&unit(), 0.0, 1.3).unwrap().f_gg);
        let far = effective_info(&unit(), 1e9, 2.0).unwrap();
        assert_relative_eq!(far, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn lorentz_scale_cubic() {
        assert_eq!(lorentz_scale(&unit()), 0.5);
        let p2 = GaussianProbe::natural(2.0).unwrap();
        assert_relative_eq!(lorentz_scale(&p2), 0.5 / 8.0);
    }

    #[test]
    fn kernel_mapping() {
        let p = kernel_params(&unit(), 1.0).unwrap();
        assert_eq!((p.c0, p.c1, p.c2, p.d0, p.d1, p.f_gg), (0.5, 0.0, 2.0, 0.0, 2.0, 2.5));
        let a = axis_from_quadratic(&p).unwrap();
        assert_eq!((a.g_c(), a.g_star()), (0.0, 0.5));
        for t in [0.3, 1.0, 4.0] {
            let p = kernel_params(&unit(), t).unwrap();
            let a = axis_from_quadratic(&p).unwrap();
            let n = normalized_coeffs(&p, &a).unwrap();
            assert_eq!(n.alpha0, 0.0);
            let expect = (2.0 * t * t).sqrt() / (t.powi(4) / 2.0 + 2.0 * t * t).sqrt();
            assert_relative_eq!(n.alpha1, expect, max_relative = 1e-14);
        }
    }

    #[test]
    fn moments() {
        let p = GaussianProbe::new(0.7, 2.0, 1.5).unwrap();
        assert_relative_eq!(p.var_z() * p.var_p(), p.hbar().powi(2) / 4.0);
        assert_eq!(p.cov_zp(), 0.0);
        assert!(GaussianProbe::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn plane_wave_collapse() {
        let mut last = f64::INFINITY;
        let mut rho = 0.0;
        for s in [1.0, 10.0, 1e2, 1e3] {
            let p = GaussianProbe::natural(s).unwrap();
            let e = effective_info(&p, 1.0, 1.0).unwrap();
            assert!(e < last);
            last = e;
            rho = correlation(&qfim(&p, 1.0, 1.0).unwrap()).unwrap();
        }
        assert!(rho > 0.999);
    }

    proptest! {
        #[test]
        fn schur_consistency(s in 0.2f64..5.0, g in -10.0f64..10.0, t in 0.01f64..50.0) {
            let p = GaussianProbe::natural(s).unwrap();
            let f = qfim(&p, g, t).unwrap();
            let e = effective_info(&p, g, t).unwrap();
            prop_assert!((e - schur_effective(&f).unwrap()).abs() <= 1e-12 * f.f_gg);
            prop_assert!((retention(&p, g, t).unwrap() - e / f.f_gg).abs() <= 1e-12);
        }

        #[test]
        fn structure_in_g(g1 in -5.0f64..5.0, g2 in -5.0f64..5.0, t in 0.0f64..10.0) {
            let p = unit();
            let a = qfim(&p, g1, t).unwrap();
            let b = qfim(&p, g2, t).unwrap();
            prop_assert_eq!(a.f_gg, b.f_gg);
            prop_assert_eq!(qfim(&p, 2.0 * g1, t).unwrap().f_gt, 2.0 * a.f_gt);
        }
    }
}
