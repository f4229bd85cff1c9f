//! Structural retention kernel for linearly gravity-coupled sensors.
//!
//! The timing block is a quadratic `c0 + c1·g + c2·g²` in gravity and, when
//! the background position operators commute to a c-number, the cross term
//! is affine `d0 + d1·g` while `f_gg` does not depend on `g`. Completing the
//! square gives the axis pair `(g_c, g_*)`; in the coordinate
//! `u = (g − g_c)/g_*` the retained fraction is
//!
//! ```text
//! R(u) = 1 − (α0 + α1·u)² / (1 + u²)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{FisherMatrix2, UnitSystem, TOL_ABS};

/// Half-width of the band outside [0, 1] that is clamped rather than rejected.
pub const KERNEL_CLAMP_BAND: f64 = 1e-9;

/// Relative threshold on `c0·c2 − c1²/4` below which the axis is degenerate.
pub const AXIS_TOL_REL: f64 = 1e-12;

/// Model coefficients of the kernel, evaluated at a fixed interrogation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub d0: f64,
    pub d1: f64,
    pub f_gg: f64,
    pub t: f64,
}

impl KernelParams {
    pub fn new(c0: f64, c1: f64, c2: f64, d0: f64, d1: f64, f_gg: f64, t: f64) -> Result<Self> {
        let p = Self {
            c0,
            c1,
            c2,
            d0,
            d1,
            f_gg,
            t,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("c0", self.c0),
            ("c1", self.c1),
            ("c2", self.c2),
            ("d0", self.d0),
            ("d1", self.d1),
            ("f_gg", self.f_gg),
            ("t", self.t),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        for (name, v) in [("c0", self.c0), ("c2", self.c2), ("f_gg", self.f_gg)] {
            if v < -TOL_ABS * v.abs().max(1.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be >= 0",
                });
            }
        }
        let disc = self.discriminant();
        let scale = (self.c0 * self.c2).abs() + 0.25 * self.c1 * self.c1;
        if disc < -1e-9 * scale {
            return Err(Error::InvalidParameter {
                name: "c0*c2 - c1^2/4",
                value: disc,
                reason: "moment form violates Cauchy-Schwarz",
            });
        }
        Ok(())
    }

    /// `c0·c2 − c1²/4`, non-negative for any physical moment form.
    pub fn discriminant(&self) -> f64 {
        self.c0 * self.c2 - 0.25 * self.c1 * self.c1
    }

    /// Full information matrix at gravity `g`.
    pub fn assemble(&self, g: f64, units: UnitSystem) -> Result<FisherMatrix2> {
        FisherMatrix2::new(self.f_gg, cross_term(self, g), timing_block(self, g), units)
    }
}

/// Vertex `g_c` and half-width `g_* > 0` of the timing parabola.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisParams {
    g_c: f64,
    g_star: f64,
}

impl AxisParams {
    pub fn new(g_c: f64, g_star: f64) -> Result<Self> {
        if !g_c.is_finite() {
            return Err(Error::InvalidParameter {
                name: "g_c",
                value: g_c,
                reason: "must be finite",
            });
        }
        if !(g_star > 0.0) || !g_star.is_finite() {
            return Err(Error::DegenerateAxis {
                g_star_sq: g_star * g_star.abs(),
            });
        }
        Ok(Self { g_c, g_star })
    }

    pub fn g_c(&self) -> f64 {
        self.g_c
    }

    pub fn g_star(&self) -> f64 {
        self.g_star
    }

    /// Inverse of [`u_coordinate`].
    pub fn gravity_at(&self, u: f64) -> f64 {
        self.g_c + u * self.g_star
    }
}

/// Normalized numerator coefficients of the kernel at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCoeffs {
    pub alpha0: f64,
    pub alpha1: f64,
    pub t: f64,
}

/// Completes the square of the timing block.
pub fn axis_from_quadratic(p: &KernelParams) -> Result<AxisParams> {
    if p.c2 <= TOL_ABS {
        return Err(Error::DegenerateTimingSector { c2: p.c2 });
    }
    let disc = p.discriminant();
    if disc <= AXIS_TOL_REL * p.c0 * p.c2 || disc <= 0.0 {
        return Err(Error::DegenerateAxis {
            g_star_sq: disc / (p.c2 * p.c2),
        });
    }
    let g_c = -p.c1 / (2.0 * p.c2);
    let g_star = disc.sqrt() / p.c2;
    AxisParams::new(g_c, g_star)
}

pub fn timing_block(p: &KernelParams, g: f64) -> f64 {
    p.c0 + p.c1 * g + p.c2 * g * g
}

pub fn cross_term(p: &KernelParams, g: f64) -> f64 {
    p.d0 + p.d1 * g
}

pub fn normalized_coeffs(p: &KernelParams, a: &AxisParams) -> Result<NormalizedCoeffs> {
    if p.f_gg <= TOL_ABS {
        return Err(Error::DegenerateBaseline { f_gg: p.f_gg });
    }
    if p.c2 <= TOL_ABS {
        return Err(Error::DegenerateTimingSector { c2: p.c2 });
    }
    let root = (p.f_gg * p.c2).sqrt();
    Ok(NormalizedCoeffs {
        alpha0: (p.d0 + p.d1 * a.g_c) / (root * a.g_star),
        alpha1: p.d1 / root,
        t: p.t,
    })
}

/// `1 − (α0 + α1·u)²/(1 + u²)`, clamped into [0, 1] within
/// [`KERNEL_CLAMP_BAND`].
pub fn retention_kernel(n: &NormalizedCoeffs, u: f64) -> Result<f64> {
    let raw = if u.is_infinite() {
        1.0 - n.alpha1 * n.alpha1
    } else {
        let num = n.alpha0 + n.alpha1 * u;
        1.0 - num * num / (1.0 + u * u)
    };
    if !(-KERNEL_CLAMP_BAND..=1.0 + KERNEL_CLAMP_BAND).contains(&raw) {
        return Err(Error::KernelOutOfRange { value: raw });
    }
    Ok(raw.clamp(0.0, 1.0))
}

pub fn u_coordinate(g: f64, a: &AxisParams) -> f64 {
    (g - a.g_c) / a.g_star
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{retention, schur_effective};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn symmetric() -> KernelParams {
        KernelParams::new(1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn symmetric_moments_give_unit_axis() {
        let a = axis_from_quadratic(&symmetric()).unwrap();
        assert_eq!(a.g_c(), 0.0);
        assert_eq!(a.g_star(), 1.0);
    }

    #[test]
    fn freefall_natural_units() {
        // ħ = m = σ = 1, t = 1: c0 = 1/2, c2 = 2, d1 = 2, f_gg = 5/2.
        let p = KernelParams::new(0.5, 0.0, 2.0, 0.0, 2.0, 2.5, 1.0).unwrap();
        let a = axis_from_quadratic(&p).unwrap();
        assert_eq!(a.g_c(), 0.0);
        assert_relative_eq!(a.g_star(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(timing_block(&p, 1.0), 2.5);
        assert_eq!(cross_term(&p, 3.0), 6.0);
        assert_relative_eq!(u_coordinate(1.0, &a), 2.0);
    }

    #[test]
    fn vertex_of_timing_block() {
        let p = KernelParams::new(3.0, -2.0, 1.5, 0.1, 0.2, 1.0, 1.0).unwrap();
        let a = axis_from_quadratic(&p).unwrap();
        assert_relative_eq!(timing_block(&p, 0.0), 3.0);
        assert_relative_eq!(
            timing_block(&p, a.g_c()),
            p.c2 * a.g_star() * a.g_star(),
            max_relative = 1e-12
        );
        assert_eq!(u_coordinate(a.g_c(), &a), 0.0);
        assert_relative_eq!(u_coordinate(a.g_c() + a.g_star(), &a), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn degenerate_sectors() {
        let flat = KernelParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            axis_from_quadratic(&flat),
            Err(Error::DegenerateTimingSector { .. })
        ));
        // perfect square: c0·c2 = c1²/4
        let square = KernelParams::new(1.0, 2.0, 1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            axis_from_quadratic(&square),
            Err(Error::DegenerateAxis { .. })
        ));
        assert!(AxisParams::new(0.0, 0.0).is_err());
        assert!(KernelParams::new(1.0, 3.0, 1.0, 0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_cross_term_coefficients() {
        let p = symmetric();
        let a = axis_from_quadratic(&p).unwrap();
        let n = normalized_coeffs(&p, &a).unwrap();
        assert_eq!((n.alpha0, n.alpha1), (0.0, 0.0));
        let flat = KernelParams::new(1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            normalized_coeffs(&flat, &a),
            Err(Error::DegenerateBaseline { .. })
        ));
    }

    #[test]
    fn kernel_reference_shapes() {
        let lorentz = NormalizedCoeffs {
            alpha0: 0.0,
            alpha1: 1.0,
            t: 0.0,
        };
        for u in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            assert_relative_eq!(
                retention_kernel(&lorentz, u).unwrap(),
                1.0 / (1.0 + u * u),
                max_relative = 1e-14
            );
        }
        let ff = NormalizedCoeffs {
            alpha0: 0.0,
            alpha1: 0.60,
            t: 0.0,
        };
        assert_relative_eq!(retention_kernel(&ff, f64::INFINITY).unwrap(), 0.64, max_relative = 1e-14);
        assert_relative_eq!(retention_kernel(&ff, 1e8).unwrap(), 0.64, max_relative = 1e-12);
        let om = NormalizedCoeffs {
            alpha0: 0.25,
            alpha1: 0.65,
            t: 0.0,
        };
        assert_relative_eq!(retention_kernel(&om, 0.0).unwrap(), 0.9375, max_relative = 1e-15);
    }

    #[test]
    fn kernel_rejects_inconsistent_coefficients() {
        let bad = NormalizedCoeffs {
            alpha0: 1.5,
            alpha1: 0.0,
            t: 0.0,
        };
        assert!(matches!(
            retention_kernel(&bad, 0.0),
            Err(Error::KernelOutOfRange { .. })
        ));
        // tiny rounding excursions are clamped
        let edge = NormalizedCoeffs {
            alpha0: 1.0 + 1e-12,
            alpha1: 0.0,
            t: 0.0,
        };
        assert_eq!(retention_kernel(&edge, 0.0).unwrap(), 0.0);
    }

    /// Random physical parameters: moments from a random 2×2 covariance of
    /// (A, B, H_g) so every Cauchy–Schwarz bound holds by construction.
    fn physical() -> impl Strategy<Value = KernelParams> {
        (
            proptest::collection::vec(-2.0f64..2.0, 9),
            0.1f64..3.0,
        )
            .prop_filter_map("degenerate", |(l, t)| {
                // Gram matrix of three random vectors = covariance of (A, B, H_g).
                let v = |i: usize| [l[3 * i], l[3 * i + 1], l[3 * i + 2]];
                let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                let (a, b, h) = (v(0), v(1), v(2));
                let c0 = 4.0 * dot(a, a);
                let c1 = 8.0 * dot(a, b);
                let c2 = 4.0 * dot(b, b);
                let d0 = 4.0 * dot(h, a);
                let d1 = 4.0 * dot(h, b);
                let f_gg = 4.0 * dot(h, h);
                let p = KernelParams::new(c0, c1, c2, d0, d1, f_gg, t).ok()?;
                if p.c2 < 1e-3 || p.f_gg < 1e-3 || p.discriminant() < 1e-3 * p.c0 * p.c2 {
                    return None;
                }
                Some(p)
            })
    }

    proptest! {
        #[test]
        fn kernel_matches_schur_route(p in physical(), g in -5.0f64..5.0) {
            let a = axis_from_quadratic(&p).unwrap();
            let n = normalized_coeffs(&p, &a).unwrap();
            let u = u_coordinate(g, &a);
            let f = p.assemble(g, UnitSystem::Natural).unwrap();
            let via_schur = retention(&f).unwrap();
            let via_kernel = retention_kernel(&n, u).unwrap();
            prop_assert!((via_schur - via_kernel).abs() < 1e-10,
                "schur {via_schur} kernel {via_kernel}");
            prop_assert!((schur_effective(&f).unwrap() / p.f_gg - via_kernel).abs() < 1e-10);
        }

        #[test]
        fn lorentzian_factorization(p in physical(), g in -5.0f64..5.0) {
            let a = axis_from_quadratic(&p).unwrap();
            let u = u_coordinate(g, &a);
            let lhs = p.c2 * a.g_star() * a.g_star() / timing_block(&p, g);
            prop_assert!((lhs - 1.0 / (1.0 + u * u)).abs() < 1e-12);
        }

        #[test]
        fn kernel_stays_in_unit_interval(p in physical(), u in -10.0f64..10.0) {
            let a = axis_from_quadratic(&p).unwrap();
            let n = normalized_coeffs(&p, &a).unwrap();
            let r = retention_kernel(&n, u).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
        }
    }
}
