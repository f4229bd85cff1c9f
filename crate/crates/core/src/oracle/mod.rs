//! Brute-force numerical oracle.
//!
//! Propagates discretized sensor models (position grid or truncated Fock
//! space), evaluates the two-parameter QFIM by two independent routes
//! (finite-difference state overlaps and generator covariances), and checks
//! the operator identities the closed forms rely on.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimation::{FisherMatrix2, UnitSystem};
use crate::kernel::KernelParams;

pub mod fock;
pub mod grid;
pub mod identities;
pub mod pulse;
pub mod report;

pub use fock::FockModel;
pub use grid::{Background, GridModel};
pub use report::CheckReport;

pub type C64 = Complex64;

/// A discretized sensor with Hamiltonian `H(g) = H₀ + g·C`.
///
/// All operators are divided by ħ so that propagation is `exp(−i·H·t)`.
pub trait OracleModel: Sync {
    fn dim(&self) -> usize;

    fn units(&self) -> UnitSystem;

    /// Unit-norm initial state.
    fn initial_state(&self) -> Vec<C64>;

    fn propagator(&self, g: f64) -> Result<Box<dyn Propagator + '_>>;

    /// Number of steps used to propagate over a duration `t`.
    fn steps_for(&self, t: f64) -> usize;

    /// `H(g)ψ/ħ`.
    fn apply_hamiltonian(&self, psi: &[C64], g: f64) -> Vec<C64>;

    /// `(∂_g H)ψ/ħ`.
    fn apply_coupling(&self, psi: &[C64]) -> Vec<C64>;

    /// Fails when a state leaves the resolved region of the discretization.
    fn check_state(&self, psi: &[C64]) -> Result<()>;
}

/// Time evolution at fixed gravity.
pub trait Propagator {
    /// `U(t)ψ` using exactly `steps` steps (ignored by exact propagators).
    /// Negative `t` with the same step count is the exact inverse.
    fn evolve_steps(&self, psi: &[C64], t: f64, steps: usize) -> Vec<C64>;
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_sq(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub(crate) fn normalize(a: &mut [C64]) {
    let n = norm_sq(a).sqrt();
    a.iter_mut().for_each(|x| *x /= n);
}

fn propagate_with(
    model: &dyn OracleModel,
    prop: &dyn Propagator,
    psi: &[C64],
    t: f64,
    steps: usize,
) -> Result<Vec<C64>> {
    let out = prop.evolve_steps(psi, t, steps);
    let drift = (norm_sq(&out) - norm_sq(psi)).abs();
    if drift > 1e-10 {
        return Err(Error::ConvergenceFailure { defect: drift });
    }
    model.check_state(&out)?;
    Ok(out)
}

/// `U(g, t)|ψ₀⟩`.
pub fn propagate(model: &dyn OracleModel, g: f64, t: f64) -> Result<Vec<C64>> {
    let prop = model.propagator(g)?;
    propagate_with(model, prop.as_ref(), &model.initial_state(), t, model.steps_for(t))
}

/// Propagates with the model's step count and again with twice as many
/// steps; fails when the two final states differ in fidelity by more than
/// `1e-10`.
pub fn propagate_converged(model: &dyn OracleModel, g: f64, t: f64) -> Result<Vec<C64>> {
    let prop = model.propagator(g)?;
    let psi0 = model.initial_state();
    let n = model.steps_for(t);
    let coarse = propagate_with(model, prop.as_ref(), &psi0, t, n)?;
    let fine = propagate_with(model, prop.as_ref(), &psi0, t, 2 * n)?;
    let defect = 1.0 - inner(&coarse, &fine).norm();
    if defect > 1e-10 {
        return Err(Error::ConvergenceFailure { defect });
    }
    Ok(fine)
}

/// Pure-state QFIM from state derivatives,
/// `F_ij = 4·Re[⟨∂ᵢψ|∂ⱼψ⟩ − ⟨∂ᵢψ|ψ⟩⟨ψ|∂ⱼψ⟩]`.
fn overlap_qfim(psi: &[C64], dg: &[C64], dt: &[C64], units: UnitSystem) -> Result<FisherMatrix2> {
    let pg = inner(psi, dg);
    let pt = inner(psi, dt);
    let gg = inner(dg, dg).re - pg.norm_sqr();
    let tt = inner(dt, dt).re - pt.norm_sqr();
    let gt = (inner(dg, dt) - pg.conj() * pt).re;
    FisherMatrix2::new(4.0 * gg, 4.0 * gt, 4.0 * tt, units)
}

fn combine(a: &[C64], b: &[C64], wa: f64, wb: f64) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x * wa + y * wb).collect()
}

/// Tolerance and step controls for [`qfim_fd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    /// Largest relative change allowed between the two Richardson levels.
    pub rel_tol: f64,
    /// Raw differences below this relative size are treated as roundoff.
    pub noise_floor: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-7,
            noise_floor: 1e-9,
        }
    }
}

/// Finite-difference QFIM with central differences at steps `h, h/2, h/4`
/// and one level of Richardson extrapolation on the state derivatives.
pub fn qfim_fd(
    model: &dyn OracleModel,
    g: f64,
    t: f64,
    step_g: f64,
    step_t: f64,
) -> Result<FisherMatrix2> {
    qfim_fd_with(model, g, t, step_g, step_t, FdOptions::default())
}

pub fn qfim_fd_with(
    model: &dyn OracleModel,
    g: f64,
    t: f64,
    step_g: f64,
    step_t: f64,
    opts: FdOptions,
) -> Result<FisherMatrix2> {
    if !(step_g > 0.0 && step_t > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step_g.min(step_t),
            reason: "finite-difference steps must be > 0",
        });
    }
    let psi0 = model.initial_state();
    let steps = model.steps_for(t);
    let p0 = model.propagator(g)?;
    let psi = propagate_with(model, p0.as_ref(), &psi0, t, steps)?;

    let mut dgs = Vec::with_capacity(3);
    let mut dts = Vec::with_capacity(3);
    for level in 0..3 {
        let hg = step_g / f64::from(1u32 << level);
        let ht = step_t / f64::from(1u32 << level);
        let up = propagate_with(model, model.propagator(g + hg)?.as_ref(), &psi0, t, steps)?;
        let dn = propagate_with(model, model.propagator(g - hg)?.as_ref(), &psi0, t, steps)?;
        dgs.push(combine(&up, &dn, 0.5 / hg, -0.5 / hg));
        let up = propagate_with(model, p0.as_ref(), &psi0, t + ht, steps)?;
        let dn = propagate_with(model, p0.as_ref(), &psi0, t - ht, steps)?;
        dts.push(combine(&up, &dn, 0.5 / ht, -0.5 / ht));
    }
    let units = model.units();
    let raw: Vec<FisherMatrix2> = (0..3)
        .map(|i| overlap_qfim(&psi, &dgs[i], &dts[i], units))
        .collect::<Result<_>>()?;
    let e1 = raw[0].max_scaled_diff(&raw[1]);
    let e2 = raw[1].max_scaled_diff(&raw[2]);
    if e2 > e1 && e2 > opts.noise_floor {
        return Err(Error::StepTooSmall { coarse: e1, fine: e2 });
    }
    let rich = |a: &[C64], b: &[C64]| combine(b, a, 4.0 / 3.0, -1.0 / 3.0);
    let r1 = overlap_qfim(&psi, &rich(&dgs[0], &dgs[1]), &rich(&dts[0], &dts[1]), units)?;
    let r2 = overlap_qfim(&psi, &rich(&dgs[1], &dgs[2]), &rich(&dts[1], &dts[2]), units)?;
    let change = r1.max_scaled_diff(&r2);
    if change > opts.rel_tol {
        return Err(Error::StepTooLarge { change });
    }
    Ok(r2)
}

/// [`qfim_fd`] with steps chosen from a coarse pass: each step is set so
/// that the state moves by about 4% of its norm, then halved until the
/// Richardson test passes.
pub fn qfim_fd_auto(model: &dyn OracleModel, g: f64, t: f64) -> Result<FisherMatrix2> {
    let probe = 1e-4 * g.abs().max(t.abs()).max(1.0);
    let psi0 = model.initial_state();
    let steps = model.steps_for(t);
    let p0 = model.propagator(g)?;
    let psi = propagate_with(model, p0.as_ref(), &psi0, t, steps)?;
    let up = propagate_with(model, model.propagator(g + probe)?.as_ref(), &psi0, t, steps)?;
    let dn = propagate_with(model, model.propagator(g - probe)?.as_ref(), &psi0, t, steps)?;
    let dg = combine(&up, &dn, 0.5 / probe, -0.5 / probe);
    let up = propagate_with(model, p0.as_ref(), &psi0, t + probe, steps)?;
    let dn = propagate_with(model, p0.as_ref(), &psi0, t - probe, steps)?;
    let dt = combine(&up, &dn, 0.5 / probe, -0.5 / probe);
    let coarse = overlap_qfim(&psi, &dg, &dt, model.units())?;
    let scale = |f: f64| if f > 1e-300 { 0.08 / f.sqrt() } else { 1e-2 };
    let mut hg = scale(coarse.f_gg).min(0.1 * g.abs().max(1.0));
    let mut ht = scale(coarse.f_tt).min(0.1 * t.abs().max(1e-3));
    let mut last = Error::StepTooLarge { change: f64::NAN };
    for _ in 0..6 {
        match qfim_fd(model, g, t, hg, ht) {
            Ok(f) => return Ok(f),
            Err(e @ Error::StepTooLarge { .. }) => {
                last = e;
                hg *= 0.5;
                ht *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Generator vectors `Ĥ_g|ψ₀⟩` (Simpson quadrature of the Heisenberg
/// coupling over `[0, t]` with `n` intervals) and `Ĥ_t|ψ₀⟩ = H(g)|ψ₀⟩`.
fn generator_vectors(
    model: &dyn OracleModel,
    prop: &dyn Propagator,
    g: f64,
    t: f64,
    n: usize,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let psi0 = model.initial_state();
    let h = t / n as f64;
    let mut acc = vec![C64::new(0.0, 0.0); psi0.len()];
    for j in 0..=n {
        let s = h * j as f64;
        let w = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let steps = model.steps_for(s);
        let phi = propagate_with(model, prop, &psi0, s, steps)?;
        let coupled = model.apply_coupling(&phi);
        let back = prop.evolve_steps(&coupled, -s, steps);
        acc.iter_mut()
            .zip(&back)
            .for_each(|(a, b)| *a += b * (w * h / 3.0));
    }
    let ht = model.apply_hamiltonian(&psi0, g);
    Ok((acc, ht))
}

/// Symmetrized covariance `Re⟨Aψ|Bψ⟩ − ⟨A⟩⟨B⟩` from the vectors `Aψ`, `Bψ`.
fn cov(psi: &[C64], a: &[C64], b: &[C64]) -> f64 {
    inner(a, b).re - inner(psi, a).re * inner(psi, b).re
}

fn qfim_from_generators(psi: &[C64], hg: &[C64], ht: &[C64], units: UnitSystem) -> Result<FisherMatrix2> {
    FisherMatrix2::new(
        4.0 * cov(psi, hg, hg),
        4.0 * cov(psi, hg, ht),
        4.0 * cov(psi, ht, ht),
        units,
    )
}

/// QFIM as four times the covariance matrix of the local generators.
///
/// The quadrature is repeated with twice the nodes; the finer result is
/// returned if the two agree within `1e-6` relative.
pub fn generator_qfim(model: &dyn OracleModel, g: f64, t: f64, n_quadrature: usize) -> Result<FisherMatrix2> {
    if n_quadrature < 16 {
        return Err(Error::InvalidParameter {
            name: "n_quadrature",
            value: n_quadrature as f64,
            reason: "need at least 16 nodes",
        });
    }
    let n = n_quadrature + n_quadrature % 2;
    let prop = model.propagator(g)?;
    let psi0 = model.initial_state();
    let (a, ht) = generator_vectors(model, prop.as_ref(), g, t, n)?;
    let (b, _) = generator_vectors(model, prop.as_ref(), g, t, 2 * n)?;
    let coarse = qfim_from_generators(&psi0, &a, &ht, model.units())?;
    let fine = qfim_from_generators(&psi0, &b, &ht, model.units())?;
    let change = coarse.max_scaled_diff(&fine);
    if change > 1e-6 {
        return Err(Error::QuadratureNotConverged { change });
    }
    Ok(fine)
}

/// Kernel coefficients harvested from generator moments at `g = 0`.
///
/// Valid when the background satisfies the weak-commutator condition, so that
/// `Ĥ_g` depends on `g` only through an additive scalar.
pub fn harvest_kernel_params(model: &dyn OracleModel, t: f64, n_quadrature: usize) -> Result<KernelParams> {
    let prop = model.propagator(0.0)?;
    let psi0 = model.initial_state();
    let n = n_quadrature.max(16);
    let n = n + n % 2;
    let (hg, h0) = generator_vectors(model, prop.as_ref(), 0.0, t, n)?;
    let c = model.apply_coupling(&psi0);
    KernelParams::new(
        4.0 * cov(&psi0, &h0, &h0),
        8.0 * cov(&psi0, &h0, &c),
        4.0 * cov(&psi0, &c, &c),
        4.0 * cov(&psi0, &hg, &h0),
        4.0 * cov(&psi0, &hg, &c),
        4.0 * cov(&psi0, &hg, &hg),
        t,
    )
}
