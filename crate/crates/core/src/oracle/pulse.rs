//! Pulse-level simulation of the π/2–π–π/2 interferometer on a position grid.
//!
//! The state is a pair of grid wavefunctions for the internal levels
//! `|a⟩, |b⟩`. A pulse with phase operator `Θ = k0·z − φ` acts as
//! `U_{π/2} = (1/√2)[[1, −iE†], [−iE, 1]]` and `U_π = −i[[0, E†], [E, 0]]`
//! with `E = exp(iΘ)`. Between pulses both components fall freely under the
//! same split-step propagator, so its step error is a common global phase.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Matrix3, Vector3};

use super::grid::{GridModel, TAIL_TOL};
use super::{norm_sq, OracleModel, C64};
use crate::error::{Error, Result};
use crate::kasevich_chu::KCConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Area {
    Half,
    Full,
}

struct TwoLevel {
    a: Vec<C64>,
    b: Vec<C64>,
}

fn pulse(model: &GridModel, s: &mut TwoLevel, k0: f64, phi: f64, area: Area) {
    let z = model.positions();
    let i = C64::new(0.0, 1.0);
    for (n, &zn) in z.iter().enumerate() {
        let e = C64::from_polar(1.0, k0 * zn - phi);
        let (a, b) = (s.a[n], s.b[n]);
        match area {
            Area::Half => {
                s.a[n] = (a - i * e.conj() * b) * FRAC_1_SQRT_2;
                s.b[n] = (b - i * e * a) * FRAC_1_SQRT_2;
            }
            Area::Full => {
                s.a[n] = -i * e.conj() * b;
                s.b[n] = -i * e * a;
            }
        }
    }
}

/// Final two-level state after the full sequence with laser phases
/// `(0, 0, φ_ctrl)`, so that `φ1 − 2φ2 + φ3 = φ_ctrl`.
fn run_sequence(model: &GridModel, k0: f64, t_sep: f64, g: f64, phi_ctrl: f64) -> Result<TwoLevel> {
    let zero = vec![C64::new(0.0, 0.0); model.dim()];
    let mut s = TwoLevel {
        a: model.initial_state(),
        b: zero,
    };
    let prop = model.propagator(g)?;
    let steps = model.steps_for(t_sep);
    pulse(model, &mut s, k0, 0.0, Area::Half);
    s.a = prop.evolve_steps(&s.a, t_sep, steps);
    s.b = prop.evolve_steps(&s.b, t_sep, steps);
    pulse(model, &mut s, k0, 0.0, Area::Full);
    s.a = prop.evolve_steps(&s.a, t_sep, steps);
    s.b = prop.evolve_steps(&s.b, t_sep, steps);
    pulse(model, &mut s, k0, phi_ctrl, Area::Half);
    check_tails(model, &s)?;
    Ok(s)
}

/// Tail weights of both components, each scaled by its population, so a
/// nearly empty output port cannot fail the check on rounding noise.
fn check_tails(model: &GridModel, s: &TwoLevel) -> Result<()> {
    let (mut edge, mut high) = (0.0, 0.0);
    for psi in [&s.a, &s.b] {
        let w = norm_sq(psi);
        let (e, h) = model.tail_weight(psi);
        edge += e * w;
        high += h * w;
    }
    if edge > TAIL_TOL || high > TAIL_TOL {
        return Err(Error::GridUnderResolved(format!(
            "edge weight {edge:e}, high-wavenumber weight {high:e} (limit {TAIL_TOL:e})"
        )));
    }
    Ok(())
}

fn require_resolved(model: &GridModel, k0: f64) -> Result<()> {
    let need = k0.abs() + 8.0 / model.spec().sigma;
    if 0.75 * model.nyquist() < need {
        return Err(Error::GridUnderResolved(format!(
            "recoil wavenumber {k0} needs a Nyquist wavenumber above {:.4}, grid has {:.4}",
            need / 0.75,
            model.nyquist()
        )));
    }
    Ok(())
}

/// Simulated population of `|b⟩` for `cfg` (the contrast field is ignored).
pub fn kc_population(cfg: &KCConfig, model: &GridModel) -> Result<f64> {
    require_resolved(model, cfg.k0)?;
    let s = run_sequence(model, cfg.k0, cfg.t, cfg.g, cfg.phi_ctrl)?;
    let pa = norm_sq(&s.a);
    let pb = norm_sq(&s.b);
    Ok(pb / (pa + pb))
}

/// Least-squares fit of `P(φ) = a0 + a1·cos φ + a2·sin φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    pub offset: f64,
    /// `C = 2·√(a1² + a2²)`.
    pub contrast: f64,
    /// `Φ0` in `P = ½[1 − C·cos(Φ0 − φ)]`, wrapped to `(−π, π]`.
    pub phase: f64,
    /// Largest pointwise deviation from the fitted curve.
    pub max_residual: f64,
}

pub fn fit_fringe(phis: &[f64], p: &[f64]) -> Result<FringeFit> {
    if phis.len() != p.len() || phis.len() < 3 {
        return Err(Error::InvalidParameter {
            name: "phase points",
            value: phis.len() as f64,
            reason: "need at least three paired samples",
        });
    }
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for (&phi, &y) in phis.iter().zip(p) {
        let row = Vector3::new(1.0, phi.cos(), phi.sin());
        ata += row * row.transpose();
        atb += row * y;
    }
    let x = ata.lu().solve(&atb).ok_or(Error::InvalidParameter {
        name: "phase points",
        value: phis.len() as f64,
        reason: "phases do not determine a fringe",
    })?;
    let max_residual = phis
        .iter()
        .zip(p)
        .map(|(&phi, &y)| (y - x[0] - x[1] * phi.cos() - x[2] * phi.sin()).abs())
        .fold(0.0, f64::max);
    Ok(FringeFit {
        offset: x[0],
        contrast: 2.0 * x[1].hypot(x[2]),
        phase: (-x[2]).atan2(-x[1]),
        max_residual,
    })
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Evenly spaced control phases on `[0, 2π)`.
pub fn phase_points(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub phis: Vec<f64>,
    pub p_b: Vec<f64>,
    pub fit: FringeFit,
}

/// Sweeps `φ_ctrl` over `n_phase` points and fits the fringe.
pub fn kc_fringe_scan(cfg: &KCConfig, model: &GridModel, n_phase: usize) -> Result<FringeScan> {
    let phis = phase_points(n_phase);
    let p_b = phis
        .iter()
        .map(|&phi| kc_population(&cfg.with_phi_ctrl(phi), model))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_fringe(&phis, &p_b)?;
    Ok(FringeScan { phis, p_b, fit })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseOutcome {
    pub p_b: f64,
    /// `|det F| / (F_gg·F_tt)` of the classical `(g, T)` Fisher matrix of the
    /// population readout, summed over an eight-point phase sweep.
    pub fisher_rank1_residual: f64,
}

/// Relative step for the `(g, T)` central differences.
pub const FD_REL_STEP: f64 = 1e-4;

/// Simulates the sequence at `cfg` and tests the rank-one structure of the
/// numerically estimated readout Fisher matrix.
///
/// Each phase point contributes the Bernoulli information
/// `∇P·∇Pᵀ / (P(1 − P))`; points with `P(1 − P) < 1e-6` are skipped.
pub fn kc_pulse_sim(cfg: &KCConfig, model: &GridModel) -> Result<PulseOutcome> {
    let p_b = kc_population(cfg, model)?;
    let hg = FD_REL_STEP * cfg.g.abs().max(1.0);
    let ht = FD_REL_STEP * cfg.t;
    let mut f = [0.0f64; 3];
    for phi in phase_points(8) {
        let base = cfg.with_phi_ctrl(phi);
        let p = kc_population(&base, model)?;
        let w = p * (1.0 - p);
        if w < 1e-6 {
            continue;
        }
        let at = |g: f64, t: f64| {
            let mut c = base;
            c.g = g;
            c.t = t;
            kc_population(&c, model)
        };
        let dg = (at(cfg.g + hg, cfg.t)? - at(cfg.g - hg, cfg.t)?) / (2.0 * hg);
        let dt = (at(cfg.g, cfg.t + ht)? - at(cfg.g, cfg.t - ht)?) / (2.0 * ht);
        f[0] += dg * dg / w;
        f[1] += dg * dt / w;
        f[2] += dt * dt / w;
    }
    let scale = f[0] * f[2];
    let fisher_rank1_residual = if scale > 0.0 {
        (f[0] * f[2] - f[1] * f[1]).abs() / scale
    } else {
        0.0
    };
    Ok(PulseOutcome {
        p_b,
        fisher_rank1_residual,
    })
}

/// `4·Var(G)` for the motional timing generator `G = −(k0/m)(p + ħk0/2)`
/// in the model's initial state, evaluated in momentum space.
pub fn kc_motional_timing_info(model: &GridModel, k0: f64) -> f64 {
    let spec = model.spec();
    let (m, h) = (spec.mass, spec.hbar);
    let psi = model.initial_state();
    let gen = |k: f64| -(k0 / m) * (h * k + 0.5 * h * k0);
    let g1 = model.in_momentum(&psi, |k| C64::new(gen(k), 0.0));
    let mean = super::inner(&psi, &g1).re;
    let second = norm_sq(&g1);
    4.0 * (second - mean * mean)
}
