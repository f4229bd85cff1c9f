//! Operator-level checks: weak-commutator scalarity, the affine gravity
//! shift of Heisenberg positions, and the factorized free-fall propagator.
//!
//! Operators are built as dense matrices in a sector of the discretized
//! Hilbert space and compared after projection onto a small interior basis,
//! which keeps box-edge and truncation artifacts out of the residuals.

use nalgebra::{DMatrix, SymmetricEigen};

use super::grid::{Background, GridModel};
use super::{inner, OracleModel, C64};
use crate::error::{Error, Result};

/// Real symmetric Hamiltonian (divided by ħ) with its eigensystem, a real
/// symmetric position operator and an orthonormal interior basis.
#[derive(Debug, Clone)]
pub struct DenseSector {
    energies: Vec<f64>,
    vectors: DMatrix<C64>,
    position: DMatrix<C64>,
    interior: DMatrix<C64>,
}

impl DenseSector {
    pub fn new(hamiltonian: DMatrix<f64>, position: DMatrix<f64>, interior: DMatrix<f64>) -> Result<Self> {
        let n = hamiltonian.nrows();
        if hamiltonian.ncols() != n || position.shape() != (n, n) || interior.nrows() != n {
            return Err(Error::InvalidParameter {
                name: "sector",
                value: n as f64,
                reason: "operator shapes disagree",
            });
        }
        let eig = SymmetricEigen::new(hamiltonian);
        Ok(Self {
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors.map(|x| C64::new(x, 0.0)),
            position: position.map(|x| C64::new(x, 0.0)),
            interior: interior.map(|x| C64::new(x, 0.0)),
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn basis_size(&self) -> usize {
        self.interior.ncols()
    }

    /// `U(s)·M` with `U(s) = exp(−i·H·s)`.
    pub fn evolve(&self, m: &DMatrix<C64>, s: f64) -> DMatrix<C64> {
        let mut tmp = self.vectors.adjoint() * m;
        for (i, e) in self.energies.iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * s);
            tmp.row_mut(i).iter_mut().for_each(|x| *x *= phase);
        }
        &self.vectors * tmp
    }

    /// Interior projection of the Heisenberg position `Qᵀ·z(s)·Q`.
    pub fn projected_position(&self, s: f64) -> DMatrix<C64> {
        let w = self.evolve(&self.interior, s);
        w.adjoint() * &self.position * w
    }

    /// Interior projection of `z(u)·z(v)`.
    fn projected_product(&self, u: f64, v: f64) -> DMatrix<C64> {
        let mut x = self.evolve(&self.interior, v);
        x = &self.position * x;
        x = self.evolve(&x, -v);
        x = self.evolve(&x, u);
        x = &self.position * x;
        self.evolve(&self.interior, u).adjoint() * x
    }
}

/// Source of dense operator sectors at a given gravity.
pub trait DenseOperatorModel {
    fn sectors(&self, g: f64) -> Result<Vec<DenseSector>>;
}

/// Number of Hermite functions used for grid projections.
pub const GRID_BASIS: usize = 10;

impl DenseOperatorModel for GridModel {
    fn sectors(&self, g: f64) -> Result<Vec<DenseSector>> {
        Ok(vec![self.dense_sector(g, GRID_BASIS)?])
    }
}

/// Off-identity part of `m` relative to its size, and the identity part.
fn off_identity(m: &DMatrix<C64>) -> (f64, C64) {
    let k = m.nrows();
    let scalar = m.trace() / k as f64;
    let norm = m.norm();
    if norm <= 1e-300 {
        return (0.0, scalar);
    }
    let mut d = m.clone();
    for i in 0..k {
        d[(i, i)] -= scalar;
    }
    (d.norm() / norm, scalar)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorCheck {
    /// `‖C − (tr C/k)·I‖_F / ‖C‖_F`, zero when `C` vanishes.
    pub residual: f64,
    /// `tr C/k` in the first sector.
    pub scalar: C64,
}

/// Tests whether `[z₀(u), z₀(v)]` is a c-number on the interior basis.
pub fn commutator_scalarity(model: &dyn DenseOperatorModel, u: f64, v: f64) -> Result<CommutatorCheck> {
    let sectors = model.sectors(0.0)?;
    let mut residual = 0.0f64;
    let mut scalar = None;
    for sec in &sectors {
        let c = sec.projected_product(u, v) - sec.projected_product(v, u);
        let scale = sec.position.norm().powi(2) / sec.dim() as f64;
        let (r, s) = if c.norm() <= 1e-13 * scale.max(1.0) {
            (0.0, C64::new(0.0, 0.0))
        } else {
            off_identity(&c)
        };
        residual = residual.max(r);
        scalar.get_or_insert(s);
    }
    Ok(CommutatorCheck {
        residual,
        scalar: scalar.unwrap_or_default(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineShift {
    /// Off-identity residual of `z_H(s; g) − z₀(s)`.
    pub residual: f64,
    /// `f(s) = tr D/(g·k)` in the first sector.
    pub f: f64,
}

/// Tests `z_H(s; g) = z₀(s) + g·f(s)·I` on the interior basis.
pub fn affine_shift_check(model: &dyn DenseOperatorModel, g: f64, s: f64) -> Result<AffineShift> {
    let with_g = model.sectors(g)?;
    let without = model.sectors(0.0)?;
    let mut residual = 0.0f64;
    let mut f = None;
    for (a, b) in with_g.iter().zip(&without) {
        let d = a.projected_position(s) - b.projected_position(s);
        let (r, scalar) = if d.norm() <= 1e-14 {
            (0.0, C64::new(0.0, 0.0))
        } else {
            off_identity(&d)
        };
        residual = residual.max(r);
        f.get_or_insert(if g == 0.0 { 0.0 } else { scalar.re / g });
    }
    Ok(AffineShift {
        residual,
        f: f.unwrap_or(0.0),
    })
}

/// Phase coefficient of the exact free-fall factorization.
pub const BCH_PHASE: f64 = 1.0 / 12.0;

/// Compares `U(g, t)` with `K(t)·exp(−i·g·G₀(t))·exp(+i·c·m·g²t³/ħ)`,
/// `G₀(t) = (t/ħ)(m·z + (t/2)·p)`, `K(t)` the free kinetic propagator and
/// `c` the phase coefficient (exactly 1/12).
///
/// A global phase is invisible to fidelity, so both sides act on the
/// two-branch state `(|0⟩|ψ₀⟩ + |1⟩|ψ₀⟩)/√2` whose `|0⟩` branch evolves at
/// `g = 0`; the returned value is `1 − |⟨rhs|lhs⟩|`.
pub fn bch_factorization_check(model: &GridModel, g: f64, t: f64, phase_coef: f64) -> Result<f64> {
    if model.spec().background != Background::Free {
        return Err(Error::InvalidParameter {
            name: "background",
            value: f64::NAN,
            reason: "factorization holds for the free-fall Hamiltonian only",
        });
    }
    let spec = model.spec();
    let (m, hbar) = (spec.mass, spec.hbar);
    let psi0 = model.initial_state();
    let steps = (4 * model.steps_for(t)).max(256);
    let lhs0 = model.propagator(0.0)?.evolve_steps(&psi0, t, steps);
    let lhs1 = model.propagator(g)?.evolve_steps(&psi0, t, steps);
    model.check_state(&lhs1)?;
    let rhs0 = model.kinetic(&psi0, t);
    let shifted = model.displacement(&psi0, g * t * m, 0.5 * g * t * t);
    let phase = C64::from_polar(1.0, phase_coef * m * g * g * t.powi(3) / hbar);
    let rhs1: Vec<C64> = model.kinetic(&shifted, t).iter().map(|x| x * phase).collect();
    let overlap = (inner(&rhs0, &lhs0) + inner(&rhs1, &lhs1)) * 0.5;
    Ok((1.0 - overlap.norm()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::grid::GridSpec;

    fn free() -> GridModel {
        GridModel::new(GridSpec::natural(256, 48.0, 1.0)).unwrap()
    }

    #[test]
    fn free_commutator_is_scalar() {
        let c = commutator_scalarity(&free(), 0.0, 1.0).unwrap();
        assert!(c.residual < 1e-8, "{}", c.residual);
        assert!((c.scalar - C64::new(0.0, 1.0)).norm() < 1e-8, "{}", c.scalar);
        assert_eq!(commutator_scalarity(&free(), 0.7, 0.7).unwrap().residual, 0.0);
    }

    #[test]
    fn harmonic_commutator_is_scalar() {
        let m = GridModel::new(
            GridSpec::natural(256, 40.0, 1.0).with_background(Background::Harmonic { omega: 1.3 }),
        )
        .unwrap();
        let c = commutator_scalarity(&m, 0.2, 1.1).unwrap();
        assert!(c.residual < 1e-8, "{}", c.residual);
        let expect = (1.3f64 * 0.9).sin() / 1.3;
        assert!((c.scalar.im - expect).abs() < 1e-8);
    }

    #[test]
    fn quartic_commutator_is_not_scalar() {
        let m = GridModel::new(
            GridSpec::natural(256, 40.0, 1.0).with_background(Background::Quartic { lambda: 0.5 }),
        )
        .unwrap();
        let c = commutator_scalarity(&m, 0.0, 1.0).unwrap();
        assert!(c.residual > 1e-2, "{}", c.residual);
    }

    #[test]
    fn free_fall_shift() {
        let a = affine_shift_check(&free(), 1.0, 1.0).unwrap();
        assert!(a.residual < 1e-8, "{}", a.residual);
        assert!((a.f + 0.5).abs() < 1e-8, "{}", a.f);
        let zero = affine_shift_check(&free(), 0.0, 1.0).unwrap();
        assert_eq!(zero.residual, 0.0);
    }

    #[test]
    fn factorized_propagator() {
        let m = GridModel::new(GridSpec::for_freefall(1.0, 1.0, 1.0)).unwrap();
        assert!(bch_factorization_check(&m, 0.0, 1.0, BCH_PHASE).unwrap() <= 1e-12);
        let good = bch_factorization_check(&m, 1.0, 1.0, BCH_PHASE).unwrap();
        assert!(good <= 1e-8, "{good}");
        let bad = bch_factorization_check(&m, 1.0, 1.0, 1.0 / 11.0).unwrap();
        assert!(bad > 100.0 * 1e-8, "{bad}");
    }
}
