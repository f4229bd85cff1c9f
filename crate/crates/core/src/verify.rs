//! The verification suite: one function per acceptance criterion, each
//! returning its individual checks as [`CheckReport`]s.
//!
//! Randomized points come from a seeded ChaCha stream, so a run is fully
//! determined by its seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::estimation::{regularized_effective, schur_effective, FisherMatrix2, PriorInfo, UnitSystem};
use crate::experiments::{self as exp, PhysicalConstants};
use crate::freefall::{self, GaussianProbe};
use crate::kasevich_chu::{self as kc, KCConfig};
use crate::kernel::{axis_from_quadratic, normalized_coeffs, retention_kernel, KernelParams};
use crate::optomech::{self as om, MechTime, OptoConfig};
use crate::oracle::grid::{Background, GridSpec};
use crate::oracle::identities::{
    affine_shift_check, bch_factorization_check, commutator_scalarity, BCH_PHASE,
};
use crate::oracle::pulse::{kc_fringe_scan, kc_motional_timing_info, kc_population, kc_pulse_sim, wrap_phase};
use crate::oracle::{generator_qfim, harvest_kernel_params, qfim_fd_auto, CheckReport, FockModel, GridModel};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// A named acceptance criterion.
pub struct Criterion {
    pub name: &'static str,
    pub summary: &'static str,
    pub run: fn(u64) -> Vec<CheckReport>,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion {
        name: "freefall-oracle",
        summary: "free-fall QFIM reproduced by finite differences (1e-6) and generator quadrature (1e-5)",
        run: freefall_oracle,
    },
    Criterion {
        name: "schur-consistency",
        summary: "free-fall effective information equals the Schur complement on a 20x20 grid",
        run: schur_consistency,
    },
    Criterion {
        name: "kc-rank1",
        summary: "internal KC Fisher matrix has |det| <= 1e-12 f_gg f_tt",
        run: kc_rank1,
    },
    Criterion {
        name: "kc-closed-forms",
        summary: "KC regularized and full-state effective information match the generic routes",
        run: kc_closed_forms,
    },
    Criterion {
        name: "kc-pulse-oracle",
        summary: "pulse-level fringe has C = 1 +- 1e-3 and phase within 1e-4 rad over 8 points",
        run: kc_pulse_oracle,
    },
    Criterion {
        name: "optomech-revivals",
        summary: "revival zeros, oracle vs quoted cross term, commutator scalarity, photon conservation",
        run: optomech_revivals,
    },
    Criterion {
        name: "operator-identities",
        summary: "BCH factorization, free-fall affine shift, quartic negative control",
        run: operator_identities,
    },
    Criterion {
        name: "golden-numbers",
        summary: "87Rb velocity, retention, requirement, ratio and localization numbers",
        run: golden_numbers,
    },
    Criterion {
        name: "asymptotics",
        summary: "rho^2 ~ t^-2 for large t and plane-wave collapse",
        run: asymptotics,
    },
    Criterion {
        name: "kernel-bound",
        summary: "harvested kernels stay in [0,1]; regularized information monotone in prior",
        run: kernel_bound,
    },
];

pub fn criterion(name: &str) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.name == name)
}

/// Runs every criterion concurrently; reports keep the criterion order.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    CRITERIA
        .par_iter()
        .map(|c| (c.run)(seed))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn check(criterion: &str, name: &str, residual: Result<f64>, tol: f64) -> CheckReport {
    match residual {
        Ok(r) => CheckReport::new(criterion, name, r, tol),
        Err(e) => CheckReport::errored(criterion, name, &e),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Free-fall sampling window.
const FF_G: (f64, f64) = (-1.5, 1.5);
const FF_T: (f64, f64) = (0.3, 2.0);

pub fn freefall_oracle(seed: u64) -> Vec<CheckReport> {
    const C: &str = "freefall-oracle";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = GaussianProbe::natural(1.0).expect("unit probe");
    let model = match GridModel::new(GridSpec::for_freefall(1.0, FF_G.1, 1.05 * FF_T.1)) {
        Ok(m) => m,
        Err(e) => return vec![CheckReport::errored(C, "grid", &e)],
    };
    let points: Vec<(f64, f64)> = (0..5)
        .map(|_| (rng.random_range(FF_G.0..FF_G.1), rng.random_range(FF_T.0..FF_T.1)))
        .collect();
    points
        .par_iter()
        .flat_map_iter(|&(g, t)| {
            let exact = freefall::qfim(&probe, g, t);
            let fd = exact
                .clone()
                .and_then(|x| Ok(qfim_fd_auto(&model, g, t)?.max_scaled_diff(&x)));
            let gen = exact.and_then(|x| Ok(generator_qfim(&model, g, t, 64)?.max_scaled_diff(&x)));
            [
                check(C, "finite-difference route", fd, 1e-6).param("g", g).param("t", t),
                check(C, "generator route", gen, 1e-5).param("g", g).param("t", t),
            ]
        })
        .collect()
}

/// Error of the generic Schur route in units of `ε/R`, the rounding floor set
/// by the cancellation in `f_gg − f_gt²/f_tt`.
fn conditioned_error(closed: f64, generic: f64, retention: f64) -> f64 {
    rel(generic, closed) * retention / f64::EPSILON
}

/// Bound on [`conditioned_error`], a few ulps of headroom.
pub const CONDITIONED_ULPS: f64 = 64.0;

pub fn schur_consistency(_seed: u64) -> Vec<CheckReport> {
    const C: &str = "schur-consistency";
    let grid = |sigma: f64| -> Result<(f64, f64)> {
        let probe = GaussianProbe::natural(sigma)?;
        let mut worst = 0.0f64;
        let mut worst_cond = 0.0f64;
        for i in 0..20 {
            for j in 0..20 {
                let g = -3.0 + 6.0 * i as f64 / 19.0;
                let t = 0.1 + 4.9 * j as f64 / 19.0;
                let a = freefall::effective_info(&probe, g, t)?;
                let b = schur_effective(&freefall::qfim(&probe, g, t)?)?;
                worst = worst.max(rel(a, b));
                worst_cond = worst_cond.max(conditioned_error(a, b, freefall::retention(&probe, g, t)?));
            }
        }
        Ok((worst, worst_cond))
    };
    let mut out = vec![check(C, "effective_info vs Schur complement, 20x20 grid", grid(1.0).map(|r| r.0), 1e-12)
        .param("sigma", 1.0)];
    for sigma in [0.5, 3.0] {
        out.push(
            check(C, "effective_info vs Schur complement in units of eps/R", grid(sigma).map(|r| r.1), CONDITIONED_ULPS)
                .param("sigma", sigma),
        );
    }
    out
}

fn random_kc(rng: &mut ChaCha8Rng) -> KCConfig {
    KCConfig::new(
        rng.random_range(1e6..2e7),
        rng.random_range(0.01..0.3),
        rng.random_range(0.3..1.0),
        rng.random_range(-10.5..10.5),
        rng.random_range(0.0..0.1),
        rng.random_range(1..1000u64),
        rng.random_range(-PI..PI),
    )
    .expect("sampled config is valid")
}

pub fn kc_rank1(seed: u64) -> Vec<CheckReport> {
    const C: &str = "kc-rank1";
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b63);
    let res = (0..1000)
        .map(|_| {
            let f = kc::internal_fisher(&random_kc(&mut rng))?;
            let scale = f.f_gg * f.f_tt;
            Ok(if scale > 0.0 { f.det().abs() / scale } else { 0.0 })
        })
        .try_fold(0.0f64, |acc, r: Result<f64>| Ok(acc.max(r?)));
    vec![check(C, "|det F_int| / (f_gg f_tt)", res, 1e-12).param("configs", 1000.0)]
}

pub fn kc_closed_forms(seed: u64) -> Vec<CheckReport> {
    const C: &str = "kc-closed-forms";
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x636c);
    let mut reg = 0.0f64;
    let mut full = 0.0f64;
    let mut full_formula = 0.0f64;
    let run = (|| -> Result<()> {
        for _ in 0..1000 {
            let cfg = random_kc(&mut rng);
            // Keep 4C²k0²g²T²·ΔT² inside [0.01, 100] so neither term is lost to rounding.
            let x: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
            let coupling = 4.0 * (cfg.contrast * cfg.k0 * cfg.g * cfg.t).powi(2);
            let prior = PriorInfo::new(coupling / x)?;
            let a = kc::internal_effective_regularized(&cfg, &prior)?;
            let b = regularized_effective(&kc::internal_fisher(&cfg)?, &prior)?;
            reg = reg.max(rel(a, b));
            let mut c = cfg;
            c.sigma_v = c.sigma_v.max(1e-4);
            let e = kc::fullstate_effective(&c)?;
            let r = kc::fullstate_retention(c.g, c.t, c.sigma_v)?;
            full = full.max(conditioned_error(e, schur_effective(&kc::fullstate_qfim(&c)?)?, r));
            let n = c.n_atoms as f64;
            let sv2 = c.sigma_v * c.sigma_v;
            let expect = n * c.k0 * c.k0 * c.t.powi(4) * sv2 / (sv2 + (c.g * c.t).powi(2));
            full_formula = full_formula.max(rel(e, expect));
        }
        Ok(())
    })();
    if let Err(e) = run {
        return vec![CheckReport::errored(C, "sampling", &e)];
    }
    vec![
        CheckReport::new(C, "internal regularized vs generic regularized Schur", reg, 1e-12),
        CheckReport::new(C, "full-state effective vs Schur of full-state QFIM in units of eps/R", full, CONDITIONED_ULPS),
        CheckReport::new(C, "full-state effective vs N k0^2 T^4 sv^2/(sv^2+g^2T^2)", full_formula, 1e-12),
    ]
}

/// Natural-unit interferometer used by the pulse-level checks.
pub fn pulse_test_config() -> (KCConfig, GridSpec) {
    let cfg = KCConfig::ideal(4.0, 1.5, 0.3, 0.5).expect("valid");
    let spec = GridSpec::for_kc(2.0, cfg.k0, cfg.t, cfg.g);
    (cfg, spec)
}

pub fn kc_pulse_oracle(_seed: u64) -> Vec<CheckReport> {
    const C: &str = "kc-pulse-oracle";
    let (cfg, spec) = pulse_test_config();
    let model = match GridModel::new(spec) {
        Ok(m) => m,
        Err(e) => return vec![CheckReport::errored(C, "grid", &e)],
    };
    let tag = |r: CheckReport| r.param("k0", cfg.k0).param("T", cfg.t).param("g", cfg.g);
    let mut out = Vec::new();
    match kc_fringe_scan(&cfg, &model, 8) {
        Ok(scan) => {
            let expect_phase = -cfg.k0 * cfg.g * cfg.t * cfg.t;
            let pointwise = scan
                .phis
                .iter()
                .zip(&scan.p_b)
                .map(|(&phi, &p)| (p - kc::fringe_probability(&cfg.with_phi_ctrl(phi))).abs())
                .fold(0.0, f64::max);
            out.push(tag(CheckReport::new(C, "fitted contrast |C - 1|", (scan.fit.contrast - 1.0).abs(), 1e-3)));
            out.push(tag(CheckReport::new(
                C,
                "fitted phase vs -k0 g T^2 (rad)",
                wrap_phase(scan.fit.phase - expect_phase).abs(),
                1e-4,
            )));
            out.push(tag(CheckReport::new(C, "pointwise fringe vs (1 - cos dPhi)/2", pointwise, 1e-4))
                .param("phase_points", 8.0));
        }
        Err(e) => out.push(CheckReport::errored(C, "fringe scan", &e)),
    }
    let dark = cfg.with_phi_ctrl(-cfg.k0 * cfg.g * cfg.t * cfg.t + PI);
    out.push(tag(check(C, "bright fringe P_b = 1 at dPhi = pi", kc_population(&dark, &model).map(|p| (p - 1.0).abs()), 1e-4)));
    out.push(tag(check(
        C,
        "readout Fisher matrix rank-one residual",
        kc_pulse_sim(&cfg, &model).map(|o| o.fisher_rank1_residual),
        1e-6,
    )));
    let sigma = model.spec().sigma;
    let expect = 4.0 * cfg.k0 * cfg.k0 / (2.0 * sigma * sigma);
    out.push(tag(CheckReport::new(
        C,
        "motional timing term 4 k0^2 Var(p)/m^2",
        rel(kc_motional_timing_info(&model, cfg.k0), expect),
        1e-10,
    )));
    out
}

/// Small-coupling point for the optomechanical oracle comparisons.
pub fn optomech_test_config() -> OptoConfig {
    OptoConfig::new(0.02, 1.0, 0.1, 0.05, 0.3, 0.5, 48, 14).expect("valid")
}

pub const OPTO_TEST_POINT: (f64, f64) = (0.4, 1.3);

pub fn optomech_revivals(_seed: u64) -> Vec<CheckReport> {
    const C: &str = "optomech-revivals";
    let cfg = optomech_test_config();
    let (g, t) = OPTO_TEST_POINT;
    let mut out = Vec::new();

    let scale = (0..=400)
        .map(|i| om::cross_term(&cfg, g, MechTime(2.0 * PI * i as f64 / 400.0)).abs())
        .fold(0.0, f64::max);
    for n in 1..=3 {
        let v = om::cross_term(&cfg, g, MechTime::revival(n)).abs() / scale;
        out.push(CheckReport::new(C, &format!("quoted cross term at t = {}pi", 2 * n), v, 1e-12).param("g", g));
    }
    let model = match FockModel::from_config(&cfg) {
        Ok(m) => m,
        Err(e) => {
            out.push(CheckReport::errored(C, "fock model", &e));
            return out;
        }
    };
    let tag = |r: CheckReport| {
        r.param("kbar", cfg.kbar)
            .param("mu", cfg.mu)
            .param("beta_r", cfg.beta_r)
            .param("beta_i", cfg.beta_i)
            .param("delta", cfg.delta)
            .param("A", cfg.a_coef)
            .param("g", g)
            .param("t", t)
    };
    match qfim_fd_auto(&model, g, t) {
        Ok(fd) => {
            let quoted = om::cross_term(&cfg, g, MechTime(t));
            out.push(tag(CheckReport::new(C, "oracle F_gt vs quoted closed form", rel(quoted, fd.f_gt), 1e-4))
                .note(format!("oracle {:.6e}, quoted {:.6e}", fd.f_gt, quoted)));
            let moment = om::moment_qfim(&cfg, g, MechTime(t)).map(|m| m.max_scaled_diff(&fd));
            out.push(tag(check(C, "oracle QFIM vs moment algebra", moment, 1e-6)));
        }
        Err(e) => out.push(tag(CheckReport::errored(C, "oracle F_gt vs quoted closed form", &e))),
    }
    for (u, v) in [(0.0, 1.0), (0.3, 2.2)] {
        out.push(
            check(C, "commutator scalarity", commutator_scalarity(&model, u, v).map(|c| c.residual), 1e-8)
                .param("u", u)
                .param("v", v),
        );
    }
    out.push(tag(check(
        C,
        "affine shift residual",
        affine_shift_check(&model, g, t).map(|a| a.residual),
        1e-8,
    )));
    for time in [t, 2.0 * PI, 7.7] {
        out.push(
            check(C, "photon-number drift", model.photon_number_drift(g, MechTime(time)), 1e-10)
                .param("g", g)
                .param("t", time),
        );
    }
    out
}

pub fn operator_identities(_seed: u64) -> Vec<CheckReport> {
    const C: &str = "operator-identities";
    let mut out = Vec::new();
    match GridModel::new(GridSpec::for_freefall(1.0, 1.0, 1.0)) {
        Ok(m) => {
            out.push(
                check(C, "BCH factorization (two-branch state)", bch_factorization_check(&m, 1.0, 1.0, BCH_PHASE), 1e-8)
                    .param("g", 1.0)
                    .param("t", 1.0),
            );
            out.push(
                check(C, "BCH at g = 0", bch_factorization_check(&m, 0.0, 1.0, BCH_PHASE), 1e-12).param("t", 1.0),
            );
            let bad = bch_factorization_check(&m, 1.0, 1.0, 1.0 / 11.0);
            out.push(match bad {
                Ok(r) => CheckReport::exceeds(C, "BCH with phase 1/11 is detected", r, 1e-6),
                Err(e) => CheckReport::errored(C, "BCH with phase 1/11 is detected", &e),
            });
        }
        Err(e) => out.push(CheckReport::errored(C, "BCH grid", &e)),
    }
    match GridModel::new(GridSpec::natural(256, 48.0, 1.0)) {
        Ok(m) => {
            for s in [0.5, 1.0, 1.5] {
                let r = affine_shift_check(&m, 1.0, s);
                out.push(
                    check(C, "free-fall shift f(s) = -s^2/2", r.clone().map(|a| (a.f + 0.5 * s * s).abs()), 1e-8)
                        .param("g", 1.0)
                        .param("s", s),
                );
                out.push(
                    check(C, "free-fall shift is a multiple of identity", r.map(|a| a.residual), 1e-8)
                        .param("s", s),
                );
            }
            let c = commutator_scalarity(&m, 0.0, 1.0);
            out.push(check(
                C,
                "free commutator equals i(v - u)",
                c.map(|c| (c.scalar - crate::oracle::C64::new(0.0, 1.0)).norm()),
                1e-8,
            ));
        }
        Err(e) => out.push(CheckReport::errored(C, "free grid", &e)),
    }
    match GridModel::new(GridSpec::natural(256, 40.0, 1.0).with_background(Background::Quartic { lambda: 0.5 })) {
        Ok(m) => out.push(match commutator_scalarity(&m, 0.0, 1.0) {
            Ok(c) => CheckReport::exceeds(C, "quartic background breaks scalarity", c.residual, 1e-2).param("lambda", 0.5),
            Err(e) => CheckReport::errored(C, "quartic background breaks scalarity", &e),
        }),
        Err(e) => out.push(CheckReport::errored(C, "quartic grid", &e)),
    }
    out
}

pub fn golden_numbers(_seed: u64) -> Vec<CheckReport> {
    const C: &str = "golden-numbers";
    let m = PhysicalConstants::STANDARD.m_rb87;
    let mut out = Vec::new();
    let mut push = |name: &str, value: Result<f64>, target: f64, tol: f64| {
        out.push(check(C, name, value.map(|v| rel(v, target)), tol).param("target", target));
    };
    let sv = exp::thermal_sigma_v(2e-6, m);
    push("thermal sigma_v at 2 uK (m/s)", sv.clone(), 1.38e-2, 1e-2);
    push("AQG retention", exp::retention_estimate(&exp::aqg()), 5.5e-4, 2e-2);
    push("GAIN retention", exp::retention_estimate(&exp::gain()), 2.9e-5, 5e-2);
    let cases = [
        ("AQG", 0.060, 0.5, 0.589, 43.0, 621.0),
        ("AQG", 0.060, 0.9, 1.77, 128.0, 207.0),
        ("GAIN", 0.260, 0.5, 2.55, 184.0, 143.0),
        ("GAIN", 0.260, 0.9, 7.65, 553.0, 47.7),
    ];
    for (label, t, r0, req, ratio, bound) in cases {
        let v = exp::required_sigma_v(r0, t);
        push(&format!("{label} required sigma_v, R0 = {r0}"), v.clone(), req, 1e-2);
        let r = v.and_then(|v| Ok(v / sv.clone()?));
        push(&format!("{label} ratio to thermal scale, R0 = {r0}"), r, ratio, 2e-2);
        push(
            &format!("{label} localization bound (pm), R0 = {r0}"),
            exp::localization_bound(r0, t, m).map(|b| b * 1e12),
            bound,
            1.5e-2,
        );
    }
    out
}

pub fn asymptotics(_seed: u64) -> Vec<CheckReport> {
    const C: &str = "asymptotics";
    let slope = (|| -> Result<f64> {
        let probe = GaussianProbe::natural(1.0)?;
        let pts: Vec<(f64, f64)> = (0..=40)
            .map(|i| {
                let t = 10f64.powf(2.0 + 2.0 * i as f64 / 40.0);
                let rho2 = crate::estimation::correlation(&freefall::qfim(&probe, 1.0, t)?)?;
                Ok((t.ln(), rho2.ln()))
            })
            .collect::<Result<_>>()?;
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / n, sy / n);
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok(num / den)
    })();
    let collapse = (|| -> Result<(f64, f64)> {
        let mut prev = 0.0f64;
        let mut worst_drop = 0.0f64;
        for i in 0..=60 {
            let sigma = 10f64.powf(3.0 * i as f64 / 60.0);
            let probe = GaussianProbe::natural(sigma)?;
            let rho2 = crate::estimation::correlation(&freefall::qfim(&probe, 1.0, 1.0)?)?;
            worst_drop = worst_drop.max(prev - rho2);
            prev = rho2;
        }
        Ok((worst_drop, prev))
    })();
    vec![
        check(C, "log-log slope of rho^2 over t in [1e2, 1e4] (|slope + 2|)", slope.map(|s| (s + 2.0).abs()), 0.05)
            .param("g", 1.0)
            .param("sigma", 1.0),
        check(C, "plane-wave collapse: largest decrease of rho^2 in sigma", collapse.clone().map(|c| c.0), 0.0)
            .param("g", 1.0)
            .param("t", 1.0),
        match collapse {
            Ok((_, last)) => CheckReport::exceeds(C, "plane-wave collapse: rho^2 at sigma = 1e3", last, 0.999),
            Err(e) => CheckReport::errored(C, "plane-wave collapse: rho^2 at sigma = 1e3", &e),
        },
    ]
}

/// Largest excursion of the kernel outside `[0, 1]` on `u ∈ [−10, 10]`.
fn kernel_excursion(p: &KernelParams) -> Result<f64> {
    let axis = axis_from_quadratic(p)?;
    let n = normalized_coeffs(p, &axis)?;
    let mut worst = 0.0f64;
    for i in 0..=400 {
        let u = -10.0 + 20.0 * i as f64 / 400.0;
        let r = retention_kernel(&n, u)?;
        worst = worst.max(-r).max(r - 1.0);
    }
    Ok(worst)
}

pub fn kernel_bound(seed: u64) -> Vec<CheckReport> {
    const C: &str = "kernel-bound";
    let mut out = Vec::new();
    let mut families: Vec<(String, Result<KernelParams>)> = Vec::new();
    for sigma in [0.3, 1.0, 4.0] {
        for t in [0.1, 1.0, 10.0] {
            let p = GaussianProbe::natural(sigma).and_then(|pr| freefall::kernel_params(&pr, t));
            families.push((format!("freefall sigma={sigma} t={t}"), p));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b62);
    for i in 0..20 {
        let mut cfg = random_kc(&mut rng);
        cfg.sigma_v = cfg.sigma_v.max(1e-4);
        families.push((format!("kc full-state #{i}"), kc::fullstate_kernel_params(&cfg)));
        let prior = PriorInfo::from_timing_uncertainty(10f64.powf(rng.random_range(-12.0..-6.0)));
        families.push((
            format!("kc internal + prior #{i}"),
            prior.and_then(|p| kc::internal_kernel_params(&cfg, &p)),
        ));
    }
    let opto = optomech_test_config();
    for t in [0.7, 2.0, 4.5] {
        families.push((format!("optomech moments t={t}"), om::moment_kernel_params(&opto, MechTime(t))));
    }
    match FockModel::from_config(&opto) {
        Ok(m) => {
            for t in [0.7, 2.0, 4.5] {
                families.push((format!("optomech oracle t={t}"), m.harvest_kernel_params(MechTime(t))));
            }
        }
        Err(e) => out.push(CheckReport::errored(C, "optomech oracle", &e)),
    }
    match GridModel::new(GridSpec::natural(512, 60.0, 1.0)) {
        Ok(m) => {
            for t in [0.5, 1.5] {
                families.push((format!("grid oracle t={t}"), harvest_kernel_params(&m, t, 32)));
            }
        }
        Err(e) => out.push(CheckReport::errored(C, "grid oracle", &e)),
    }
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (name, p) in &families {
        match p.clone().and_then(|p| kernel_excursion(&p)) {
            Ok(x) => worst = worst.max(x),
            Err(e) => failures.push(format!("{name}: {}", e.name())),
        }
    }
    let mut r = CheckReport::new(C, "kernel excursion outside [0,1]", worst, 0.0)
        .param("families", families.len() as f64);
    if !failures.is_empty() {
        r.passed = false;
        r.note = failures.join("; ");
    }
    out.push(r);

    let mut violations = 0usize;
    let mut errors = 0usize;
    for _ in 0..1000 {
        let f = random_psd(&mut rng);
        let a = 10f64.powf(rng.random_range(-3.0..3.0)) * f.f_tt;
        let b = a * (1.0 + rng.random_range(1e-3..10.0));
        match (
            regularized_effective(&f, &PriorInfo::new(a).expect("positive")),
            regularized_effective(&f, &PriorInfo::new(b).expect("positive")),
        ) {
            (Ok(x), Ok(y)) => {
                if y < x * (1.0 - 1e-12) {
                    violations += 1;
                }
            }
            _ => errors += 1,
        }
    }
    out.push(
        CheckReport::new(C, "regularized information monotone in prior (violations)", (violations + errors) as f64, 0.0)
            .param("cases", 1000.0),
    );
    out
}

fn random_psd(rng: &mut ChaCha8Rng) -> FisherMatrix2 {
    let a = rng.random_range(0.1..10.0);
    let c = rng.random_range(0.1..10.0);
    let rho = rng.random_range(-0.999..0.999);
    FisherMatrix2::new(a, rho * (a * c).sqrt(), c, UnitSystem::Natural).expect("psd by construction")
}

/// True when every check of `name` passed.
pub fn criterion_passed(reports: &[CheckReport], name: &str) -> bool {
    reports.iter().filter(|r| r.criterion == name).all(|r| r.passed)
}
