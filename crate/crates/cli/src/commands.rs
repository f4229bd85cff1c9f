//! Table builders behind each subcommand.

use std::f64::consts::PI;
use std::fmt;

use anyhow::Result;
use rayon::prelude::*;

use gravtime_core::estimation::{correlation, retention};
use gravtime_core::experiments::{self, PhysicalConstants};
use gravtime_core::kernel::{axis_from_quadratic, normalized_coeffs, retention_kernel, NormalizedCoeffs};
use gravtime_core::oracle::grid::GridSpec;
use gravtime_core::oracle::{generator_qfim, CheckReport, FockModel, GridModel};
use gravtime_core::{
    freefall, kasevich_chu as kc, optomech, AxisParams, GaussianProbe, KCConfig, KernelParams, MechTime, OptoConfig,
    PriorInfo, UnitSystem,
};

use crate::output::{Cell, Table};
use crate::params::{invalid, linspace, time_sweep, Params};

/// A numerical check requested on the command line did not hold. Exit code 2.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

/// A finished table plus a failure to report after it has been written.
pub struct Outcome {
    pub table: Table,
    pub failure: Option<CheckFailed>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self { table, failure: None }
    }
}

fn header(table: &mut Table, command: &str, units: &str, p: &Params) {
    let mut meta = vec![
        ("command".to_string(), command.to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("units".to_string(), units.to_string()),
    ];
    meta.extend(p.metadata());
    meta.append(&mut table.meta);
    table.meta = meta;
}

fn cells<const N: usize>(v: [f64; N]) -> Vec<Cell> {
    v.into_iter().map(Cell::Num).collect()
}

const FREEFALL_ORACLE_NODES: usize = 64;

pub fn freefall(p: &Params) -> Result<Outcome> {
    let sigma = p.num("sigma", 1.0)?;
    let g = p.num("g", 1.0)?;
    let times = time_sweep(p, "t", 2.0, 41, true)?;
    let probe = GaussianProbe::natural(sigma)?;
    let mut table = Table::new(&["g", "t", "f_gg", "f_gt", "f_tt", "f_eff", "retention", "rho2"]);
    for &t in &times {
        let f = freefall::qfim(&probe, g, t)?;
        let r = freefall::retention(&probe, g, t)?;
        table.push(cells([g, t, f.f_gg, f.f_gt, f.f_tt, freefall::effective_info(&probe, g, t)?, r, 1.0 - r]));
    }
    let mut failure = None;
    if p.switch("oracle") {
        let tol = p.num("tol", 1e-5)?;
        let t_end = times.iter().copied().fold(0.0, f64::max);
        let model = GridModel::new(GridSpec::for_freefall(sigma, g.abs(), 1.05 * t_end))?;
        let oracle: Vec<Option<(f64, f64, f64, f64)>> = times
            .par_iter()
            .map(|&t| -> Result<_> {
                if t == 0.0 {
                    return Ok(None);
                }
                let exact = freefall::qfim(&probe, g, t)?;
                let f = generator_qfim(&model, g, t, FREEFALL_ORACLE_NODES)?;
                Ok(Some((f.f_gg, f.f_gt, f.f_tt, f.max_scaled_diff(&exact))))
            })
            .collect::<Result<_>>()?;
        table.header.extend(["oracle_f_gg", "oracle_f_gt", "oracle_f_tt", "oracle_residual"].map(String::from));
        let mut worst = 0.0f64;
        for (row, o) in table.rows.iter_mut().zip(oracle) {
            let (a, b, c, res) = o.unwrap_or((0.0, 0.0, 0.0, 0.0));
            worst = worst.max(res);
            row.extend(cells([a, b, c, res]));
        }
        if !(worst <= tol) {
            failure = Some(CheckFailed(format!(
                "oracle disagrees with the closed form: residual {worst:e} > tol {tol:e}"
            )));
        }
    }
    header(&mut table, "freefall", UnitSystem::Natural.label(), p);
    Ok(Outcome { table, failure })
}

/// Default effective wavenumber, two-photon Rb D2 (m⁻¹).
const K0_RB: f64 = 1.61e7;

fn kc_config(p: &Params, t_sep: f64) -> Result<KCConfig> {
    let n_atoms = p.count("n_atoms", 1)?;
    Ok(KCConfig::new(
        p.num("k0", K0_RB)?,
        t_sep,
        p.num("contrast", 1.0)?,
        p.num("g", PhysicalConstants::STANDARD.g_standard)?,
        p.num("sigma_v", 1.38e-2)?,
        n_atoms as u64,
        p.num("phi_ctrl", 0.0)?,
    )?)
}

pub fn kc(p: &Params) -> Result<Outcome> {
    let seps = time_sweep(p, "T", 0.060, 1, false)?;
    let prior = PriorInfo::from_timing_uncertainty(p.num("prior_dt", 1e-6)?)?;
    let mut table = Table::new(&[
        "T",
        "delta_phi",
        "p_b",
        "f_gg_int",
        "f_gt_int",
        "f_tt_int",
        "f_eff_int_reg",
        "g_star_int",
        "f_gg_full",
        "f_gt_full",
        "f_tt_full",
        "f_eff_full",
        "retention_full",
        "g_star_full",
    ]);
    for &t in &seps {
        let cfg = kc_config(p, t)?;
        let fi = kc::internal_fisher(&cfg)?;
        let ff = kc::fullstate_qfim(&cfg)?;
        let g_int = axis_from_quadratic(&kc::internal_kernel_params(&cfg, &prior)?)?;
        let g_full = axis_from_quadratic(&kc::fullstate_kernel_params(&cfg)?)?;
        table.push(cells([
            t,
            kc::delta_phi(&cfg),
            kc::fringe_probability(&cfg),
            fi.f_gg,
            fi.f_gt,
            fi.f_tt,
            kc::internal_effective_regularized(&cfg, &prior)?,
            g_int.g_star(),
            ff.f_gg,
            ff.f_gt,
            ff.f_tt,
            kc::fullstate_effective(&cfg)?,
            kc::fullstate_retention(cfg.g, t, cfg.sigma_v)?,
            g_full.g_star(),
        ]));
    }
    header(&mut table, "kc", UnitSystem::Si.label(), p);
    Ok(table.into())
}

/// Optomechanical config with truncations sized for `|g| ≤ g_max`.
fn opto_config(p: &Params, defaults: (f64, f64, f64, f64), g_max: f64, force_tuned: bool) -> Result<OptoConfig> {
    let cfg = OptoConfig::with_auto_truncation(
        p.num("kbar", defaults.0)?,
        p.num("mu", defaults.1)?,
        p.num("beta_r", defaults.2)?,
        p.num("beta_i", defaults.3)?,
        if force_tuned { 0.0 } else { p.num("delta", 0.0)? },
        p.num("A", 1.0)?,
        g_max,
    )?;
    let cfg = if force_tuned || p.switch("tuned") { cfg.tuned() } else { cfg };
    p.derived("delta", cfg.delta);
    p.derived("fock_dim", cfg.fock_dim);
    p.derived("photon_max", cfg.photon_max);
    Ok(cfg)
}

const OPTO_DEFAULTS: (f64, f64, f64, f64) = (0.1, 2.0, 0.1, 0.0);

pub fn opto(p: &Params) -> Result<Outcome> {
    let g = p.num("g", 0.0)?;
    let times = time_sweep(p, "t", 4.0 * PI, 200, false)?;
    let cfg = opto_config(p, OPTO_DEFAULTS, g, false)?;
    let axis = optomech::axis_params(&cfg)?;
    let system = FockModel::from_config(&cfg)?.spectral_system(g);
    let mut table = Table::new(&[
        "t",
        "g",
        "u",
        "cross_term_quoted",
        "f_gt_derived",
        "f_gg",
        "f_gt",
        "f_tt",
        "rho2",
        "retention",
    ]);
    let u = (g - axis.g_c()) / axis.g_star();
    for &t in &times {
        let f = system.qfim(MechTime(t))?;
        let derived = optomech::moment_qfim(&cfg, g, MechTime(t))?;
        let rho2 = correlation(&f)?;
        table.push(cells([
            t,
            g,
            u,
            optomech::cross_term(&cfg, g, MechTime(t)),
            derived.f_gt,
            f.f_gg,
            f.f_gt,
            f.f_tt,
            rho2,
            retention(&f)?,
        ]));
    }
    header(&mut table, "opto", UnitSystem::Mechanical.label(), p);
    Ok(table.into())
}

fn dictionary_row(table: &mut Table, name: &str, units: UnitSystem, params: &KernelParams, axis: &AxisParams, u: f64) -> Result<()> {
    let NormalizedCoeffs { alpha0, alpha1, t } = normalized_coeffs(params, axis)?;
    let r = retention_kernel(&NormalizedCoeffs { alpha0, alpha1, t }, u)?;
    table.push(vec![
        name.into(),
        units.label().into(),
        t.into(),
        axis.g_c().into(),
        axis.g_star().into(),
        alpha0.into(),
        alpha1.into(),
        u.into(),
        r.into(),
    ]);
    Ok(())
}

/// Axis and kernel coefficients of the four benchmark rows at user parameters.
pub fn dictionary(p: &Params) -> Result<Outcome> {
    let u = p.num("u", 1.0)?;
    let t = p.num("t", 2.0)?;
    let mut table = Table::new(&["platform", "units", "t", "g_c", "g_star", "alpha0", "alpha1", "u", "retention"]);

    let probe = GaussianProbe::natural(p.num("sigma", 1.0)?)?;
    let ff = freefall::kernel_params(&probe, t)?;
    dictionary_row(&mut table, "free fall", UnitSystem::Natural, &ff, &axis_from_quadratic(&ff)?, u)?;

    let cfg = kc_config(p, p.num("T", 0.060)?)?;
    let prior = PriorInfo::from_timing_uncertainty(p.num("prior_dt", 1e-6)?)?;
    let internal = kc::internal_kernel_params(&cfg, &prior)?;
    dictionary_row(&mut table, "KC internal (prior)", UnitSystem::Si, &internal, &axis_from_quadratic(&internal)?, u)?;
    let full = kc::fullstate_kernel_params(&cfg)?;
    dictionary_row(&mut table, "KC full state", UnitSystem::Si, &full, &axis_from_quadratic(&full)?, u)?;

    let opto = OptoConfig::new(
        p.num("kbar", OPTO_DEFAULTS.0)?,
        p.num("mu", OPTO_DEFAULTS.1)?,
        p.num("beta_r", OPTO_DEFAULTS.2)?,
        p.num("beta_i", OPTO_DEFAULTS.3)?,
        p.num("delta", 0.0)?,
        p.num("A", 1.0)?,
        2,
        0,
    )?;
    let opto = if p.switch("tuned") { opto.tuned() } else { opto };
    p.derived("delta", opto.delta);
    let om = optomech::moment_kernel_params(&opto, MechTime(t))?;
    dictionary_row(&mut table, "optomechanics", UnitSystem::Mechanical, &om, &optomech::axis_params(&opto)?, u)?;

    header(&mut table, "kernel dictionary", "per row", p);
    Ok(table.into())
}

pub fn experiments_table(p: &Params) -> Result<Outcome> {
    let rows = experiments::baseline_table(&experiments::baseline_platforms())?;
    let mut table = Table::new(&[
        "platform",
        "t_src_K",
        "t_int_s",
        "sigma_v_mps",
        "g_t_mps",
        "retention_kc",
        "required_sigma_v_half_mps",
        "required_sigma_v_090_mps",
        "ratio_half",
        "ratio_090",
        "localization_half_pm",
        "localization_090_pm",
        "caveat",
    ]);
    for r in rows {
        let mut row = vec![Cell::Text(r.platform)];
        row.extend(cells([
            r.t_src_k,
            r.t_int_s,
            r.sigma_v_mps,
            r.g_t_mps,
            r.retention_kc,
            r.required_sigma_v_half_mps,
            r.required_sigma_v_090_mps,
            r.ratio_half,
            r.ratio_090,
            r.localization_half_pm,
            r.localization_090_pm,
        ]));
        row.push(Cell::Text(r.caveat));
        table.push(row);
    }
    constants_meta(&mut table);
    header(&mut table, "experiments table", UnitSystem::Si.label(), p);
    Ok(table.into())
}

fn constants_meta(table: &mut Table) {
    let c = PhysicalConstants::STANDARD;
    table.meta("hbar", format!("{:?}", c.hbar));
    table.meta("k_boltzmann", format!("{:?}", c.k_boltzmann));
    table.meta("m_rb87", format!("{:?}", c.m_rb87));
    table.meta("g_standard", format!("{:?}", c.g_standard));
}

pub fn fig1(p: &Params) -> Result<Outcome> {
    let n = p.count("grid_points", 401)?;
    let lorentz = NormalizedCoeffs { alpha0: 0.0, alpha1: 1.0, t: 0.0 };
    let ff = NormalizedCoeffs { alpha0: 0.0, alpha1: 0.60, t: 0.0 };
    let om = NormalizedCoeffs { alpha0: 0.25, alpha1: 0.65, t: 0.0 };
    let mut table = Table::new(&["u", "R_lorentzian", "R_freefall", "R_opto"]);
    for u in linspace(-10.0, 10.0, n) {
        table.push(cells([
            u,
            retention_kernel(&lorentz, u)?,
            retention_kernel(&ff, u)?,
            retention_kernel(&om, u)?,
        ]));
    }
    table.meta("R_lorentzian", "alpha0 = 0, alpha1 = 1");
    table.meta("R_freefall", "alpha0 = 0, alpha1 = 0.6");
    table.meta("R_opto", "alpha0 = 0.25, alpha1 = 0.65");
    header(&mut table, "figures fig1", "dimensionless", p);
    Ok(table.into())
}

/// Fixed offsets for the degradation curves; all lie on the default `u` grid.
pub const FIG2_FIXED_U: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

pub fn fig2(p: &Params) -> Result<Outcome> {
    let n_u = p.count("u_points", 41)?;
    let n_t = p.count("grid_points", 360)?;
    let span = p.num("t", 4.5 * PI)? / PI;
    if !(span > 0.0) {
        return Err(invalid("`t` must be positive"));
    }
    // t = π·(span·j/n) hits 2π and 4π exactly on the default grid.
    let t_grid: Vec<f64> = (1..=n_t).map(|j| PI * (span * j as f64 / n_t as f64)).collect();
    let u_grid = linspace(-1.0, 1.0, n_u);
    let probe = opto_config(p, (0.1, 2.0, 0.10, 0.0), 0.0, true)?;
    let axis = optomech::axis_params(&probe)?;
    let g_max = axis.gravity_at(-1.0).abs().max(axis.gravity_at(1.0).abs());
    let cfg = opto_config(p, (0.1, 2.0, 0.10, 0.0), g_max, true)?;
    let field = optomech::correlation_field(&cfg, &u_grid, &t_grid)?;
    let mut table = Table::new(&["u", "t", "g", "rho2", "retention", "degradation"]);
    for c in field {
        table.push(cells([c.u, c.t, c.g, c.rho2, c.retention, c.degradation]));
    }
    let revivals: Vec<String> = (1..)
        .map(|n| MechTime::revival(n).value())
        .take_while(|&t| t <= span * PI)
        .map(|t| format!("{t:?}"))
        .collect();
    table.meta("g_c", format!("{:?}", axis.g_c()));
    table.meta("g_star", format!("{:?}", axis.g_star()));
    table.meta("fixed_u", FIG2_FIXED_U.map(|u| format!("{u:?}")).join(" "));
    table.meta("revival_times", revivals.join(" "));
    header(&mut table, "figures fig2", UnitSystem::Mechanical.label(), p);
    Ok(table.into())
}

pub fn fig3(p: &Params) -> Result<Outcome> {
    let n = p.count("grid_points", 250)?;
    let rows = experiments::figure3_table(&experiments::figure3_platforms(), &linspace(0.001, 0.25, n))?;
    let mut table = Table::new(&[
        "platform",
        "t_src_K",
        "sigma_v_mps",
        "t_int_s",
        "retention_kc",
        "retention_freefall_proxy",
        "caveat",
        "kind",
    ]);
    for r in rows {
        let mut row = vec![Cell::Text(r.platform)];
        row.extend(cells([r.t_src_k, r.sigma_v_mps, r.t_int_s, r.retention_kc, r.retention_freefall_proxy]));
        row.push(Cell::Text(r.caveat));
        row.push(Cell::Text(r.kind));
        table.push(row);
    }
    constants_meta(&mut table);
    header(&mut table, "figures fig3", UnitSystem::Si.label(), p);
    Ok(table.into())
}

/// Verification reports as a table, for `--format csv`.
pub fn reports_table(reports: &[CheckReport], p: &Params) -> Table {
    let mut table = Table::new(&["criterion", "check", "residual", "tolerance", "passed", "params", "note"]);
    for r in reports {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v:?}")).collect();
        table.push(vec![
            r.criterion.as_str().into(),
            r.check.as_str().into(),
            r.residual.into(),
            r.tolerance.into(),
            r.passed.into(),
            params.join(";").into(),
            r.note.as_str().into(),
        ]);
    }
    header(&mut table, "verify", "per check", p);
    table
}
