//! Acceptance suite. Each test runs one criterion, prints every individual
//! check and then a single PASS/FAIL line for the criterion.

use std::io::Write;
use std::time::Instant;

use gravtime_core::verify::{criterion, DEFAULT_SEED};

fn run(name: &str) {
    let c = criterion(name).expect("known criterion");
    let start = Instant::now();
    let reports = (c.run)(DEFAULT_SEED);
    let elapsed = start.elapsed().as_secs_f64();
    for r in &reports {
        println!("    {}", r.line());
    }
    let ok = !reports.is_empty() && reports.iter().all(|r| r.passed);
    // Written to the raw handle so the line survives output capture.
    let _ = writeln!(
        std::io::stderr().lock(),
        "{} {name}: {} ({} checks, {elapsed:.2} s)",
        if ok { "PASS" } else { "FAIL" },
        c.summary,
        reports.len()
    );
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.line()).collect();
    assert!(ok, "{name} failed:\n{}", failed.join("\n"));
}

#[test]
fn freefall_closed_form_vs_oracle() {
    let start = Instant::now();
    run("freefall-oracle");
    assert!(start.elapsed().as_secs_f64() < 60.0, "free-fall oracle exceeded 60 s");
}

#[test]
fn schur_consistency() {
    run("schur-consistency");
}

#[test]
fn kc_rank_one_identity() {
    run("kc-rank1");
}

#[test]
fn kc_closed_forms() {
    run("kc-closed-forms");
}

#[test]
fn kc_pulse_level_oracle() {
    run("kc-pulse-oracle");
}

#[test]
fn optomech_revivals() {
    run("optomech-revivals");
}

#[test]
fn operator_identities() {
    run("operator-identities");
}

#[test]
fn golden_numbers() {
    run("golden-numbers");
}

#[test]
fn asymptotics() {
    run("asymptotics");
}

#[test]
fn kernel_bound() {
    run("kernel-bound");
}
