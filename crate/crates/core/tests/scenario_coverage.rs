//! Runs the scenarios the acceptance suite does not already cover, at their
//! documented default budgets, and requires every check to pass.

use densitylab::drivers::SeedSpec;
use densitylab::scenarios::{run_scenario, ScenarioConfig};
use std::sync::Mutex;

static SEQUENTIAL: Mutex<()> = Mutex::new(());

fn run_and_require_pass(name: &str, seed: u64) {
    let _machine = SEQUENTIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut config = ScenarioConfig::defaults(name);
    config.seed = SeedSpec::new(seed, 0);
    let report = run_scenario(&config).unwrap();
    assert!(!report.checks.is_empty());
    for check in &report.checks {
        assert!(
            check.fitted.is_finite(),
            "{name}/{}: non-finite fitted value",
            check.check_id
        );
    }
    assert!(
        report.overall_pass,
        "{name} failed: {:?}",
        report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!(
                "{} fitted {} predicted {}",
                c.check_id, c.fitted, c.predicted
            ))
            .collect::<Vec<_>>()
    );
}

#[test]
fn pathdep_scenario_passes_at_default_budget() {
    run_and_require_pass("pathdep", 211);
}

#[test]
fn weighted_singular_scenario_passes_at_default_budget() {
    run_and_require_pass("weighted_singular", 212);
}

#[test]
fn rough_drift_scenario_passes_at_default_budget() {
    run_and_require_pass("rough_drift", 213);
}
