//! `gravtime`: parameter sweeps, figure datasets, dictionary tables and the
//! verification runner.
//!
//! Exit status is 0 on success, 1 for invalid input and 2 for numerical
//! failures (including failed verification checks).

// Negated comparisons are used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use gravtime_core::oracle::report::write_records;
use gravtime_core::verify::{self, CRITERIA, DEFAULT_SEED};

use commands::{CheckFailed, Outcome};
use output::{with_output, Format};
use params::{InvalidInput, Params};

#[derive(Parser, Debug)]
#[command(name = "gravtime", version, about = "Gravity-time Fisher geometry: sweeps, figure data and oracle checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gaussian free fall over a time sweep (natural units).
    Freefall,
    /// Three-pulse interferometer over a pulse-separation sweep (SI).
    Kc,
    /// Optomechanical benchmark over a time sweep, entries from the Fock oracle.
    Opto,
    /// Retention-kernel tables.
    Kernel {
        #[arg(value_enum)]
        table: KernelTable,
    },
    /// Literature-anchored platform estimates.
    Experiments {
        #[arg(value_enum)]
        table: ExperimentsTable,
    },
    /// Run the oracle suite; exits 2 if any check fails.
    Verify,
    /// Datasets behind the three figures.
    Figures {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KernelTable {
    /// Axis and coefficients of the four benchmark rows.
    Dictionary,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExperimentsTable {
    /// Baseline estimates, requirements and localization bounds.
    Table,
    /// Constrained-regime curves and markers.
    Fig3,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Args, Debug)]
struct Common {
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output encoding; `verify` defaults to records, everything else to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Flat TOML file of parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of sweep points.
    #[arg(long, global = true)]
    grid_points: Option<u64>,
    /// Tolerance for oracle cross-checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    k0: Option<f64>,
    /// Pulse separation in s; end of the `kc` sweep.
    #[arg(long = "T", global = true)]
    t_sep: Option<f64>,
    /// Model time (natural or mechanical units); end of time sweeps.
    #[arg(long = "t", global = true)]
    t: Option<f64>,
    /// Start of the time sweep.
    #[arg(long, global = true)]
    t_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    g: Option<f64>,
    #[arg(long, global = true)]
    sigma_v: Option<f64>,
    #[arg(long, global = true)]
    contrast: Option<f64>,
    /// Timing prior width ΔT in s.
    #[arg(long, global = true)]
    prior_dt: Option<f64>,
    #[arg(long, global = true)]
    n_atoms: Option<u64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    phi_ctrl: Option<f64>,
    /// Free-fall packet width (natural units).
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    kbar: Option<f64>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    beta_r: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    beta_i: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Gravity coupling `A` of the optomechanical model.
    #[arg(long = "A", global = true)]
    a_coef: Option<f64>,
    /// Offset coordinate used by `kernel dictionary`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    u: Option<f64>,
    /// Points along `u` for `figures fig2`.
    #[arg(long, global = true)]
    u_points: Option<u64>,
    /// Use the tuned detuning `δ = −2k̄β_R`.
    #[arg(long, global = true)]
    tuned: bool,
    /// Cross-check closed forms against the grid oracle (`freefall`).
    #[arg(long, global = true)]
    oracle: bool,
}

impl Common {
    fn params(&self) -> Result<Params> {
        let int = |v: Option<u64>| v.map(|x| x as f64);
        let flags = [
            ("grid_points", int(self.grid_points)),
            ("tol", self.tol),
            ("seed", int(self.seed)),
            ("k0", self.k0),
            ("T", self.t_sep),
            ("t", self.t),
            ("t_min", self.t_min),
            ("g", self.g),
            ("sigma_v", self.sigma_v),
            ("contrast", self.contrast),
            ("prior_dt", self.prior_dt),
            ("n_atoms", int(self.n_atoms)),
            ("phi_ctrl", self.phi_ctrl),
            ("sigma", self.sigma),
            ("kbar", self.kbar),
            ("mu", self.mu),
            ("beta_r", self.beta_r),
            ("beta_i", self.beta_i),
            ("delta", self.delta),
            ("A", self.a_coef),
            ("u", self.u),
            ("u_points", int(self.u_points)),
        ];
        Params::load(
            self.config.as_deref(),
            &flags,
            &[("tuned", self.tuned), ("oracle", self.oracle)],
        )
    }
}

fn run_verify(cli: &Cli, p: &Params) -> Result<()> {
    let seed = p.num("seed", DEFAULT_SEED as f64)? as u64;
    let reports = verify::run_all(seed);
    for c in CRITERIA {
        let status = if verify::criterion_passed(&reports, c.name) { "PASS" } else { "FAIL" };
        eprintln!("{status} {}: {}", c.name, c.summary);
        for r in reports.iter().filter(|r| r.criterion == c.name && !r.passed) {
            eprintln!("    {}", r.line());
        }
    }
    match cli.common.format.unwrap_or(Format::Records) {
        Format::Records => with_output(cli.common.out.as_deref(), |w| Ok(write_records(w, &reports)?))?,
        Format::Csv => commands::reports_table(&reports, p).write(Format::Csv, cli.common.out.as_deref())?,
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CheckFailed(format!("{failed} of {} checks failed", reports.len())).into());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let p = cli.common.params()?;
    let outcome: Outcome = match cli.command {
        Command::Freefall => commands::freefall(&p)?,
        Command::Kc => commands::kc(&p)?,
        Command::Opto => commands::opto(&p)?,
        Command::Kernel { table: KernelTable::Dictionary } => commands::dictionary(&p)?,
        Command::Experiments { table: ExperimentsTable::Table } => commands::experiments_table(&p)?,
        Command::Experiments { table: ExperimentsTable::Fig3 } | Command::Figures { figure: Figure::Fig3 } => {
            commands::fig3(&p)?
        }
        Command::Figures { figure: Figure::Fig1 } => commands::fig1(&p)?,
        Command::Figures { figure: Figure::Fig2 } => commands::fig2(&p)?,
        Command::Verify => return run_verify(cli, &p),
    };
    outcome
        .table
        .write(cli.common.format.unwrap_or(Format::Csv), cli.common.out.as_deref())?;
    match outcome.failure {
        Some(f) => Err(f.into()),
        None => Ok(()),
    }
}

/// Exit code and message prefix for an error.
fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    if let Some(e) = err.downcast_ref::<gravtime_core::Error>() {
        return (if e.is_validation() { 1 } else { 2 }, e.name());
    }
    if err.downcast_ref::<InvalidInput>().is_some() {
        return (1, "InvalidInput");
    }
    if err.downcast_ref::<CheckFailed>().is_some() {
        return (2, "CheckFailed");
    }
    (2, "Io")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, name) = classify(&err);
            eprintln!("error: {name}: {err:#}");
            ExitCode::from(code)
        }
    }
}
