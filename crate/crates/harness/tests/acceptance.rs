//! Acceptance criteria, one test per criterion. Each prints a single
//! `ACn pass|FAIL` line followed by the measurements behind it.
//!
//! Run with `cargo test -p hvpopt-harness --test acceptance -- --nocapture`.

use hvpopt_harness::config::ExperimentConfig;
use hvpopt_harness::experiment::{lower_bound, run_grid, summarize, RunOutcome};
use hvpopt_harness::verify::*;
use std::path::PathBuf;
use std::time::Instant;

const SEED: u64 = DEFAULT_SEED;

fn config(name: &str) -> ExperimentConfig {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{name}: {e:#}"))
}

/// Runs `body`, adds the runtime limit as one more check, prints and asserts.
fn criterion(id: &str, title: &str, mode: &str, max_secs: f64, body: impl FnOnce() -> Vec<PropertyCheck>) {
    let start = Instant::now();
    let mut checks = body();
    let secs = start.elapsed().as_secs_f64();
    checks.push(PropertyCheck::at_most("runtime", "seconds", secs, max_secs));
    let ok = checks.iter().all(|c| c.passed);
    println!("{id} {} {title} [{mode}] ({secs:.1}s)", if ok { "pass" } else { "FAIL" });
    for c in &checks {
        println!("    {}", c.line());
    }
    assert!(ok, "{id} failed");
}

#[test]
fn ac01_estimator_error() {
    criterion("AC1", "estimator mean squared error <= 1.2 eps^2", "derived", 120.0, || {
        vec![estimator_error(20, 2_000, 50, SEED)]
    });
}

#[test]
fn ac02_estimator_query_budget() {
    criterion("AC2", "mean queries per estimator call within the closed-form bound", "derived", 60.0, || {
        query_budget(10_000, SEED)
    });
}

#[test]
fn ac03_elbow_slopes() {
    criterion("AC3", "log-log slopes -4 (SGD) and -3 (variance-reduced SGD)", "derived", 1_800.0, || {
        let mut out = Vec::new();
        for (file, name, want) in [("sweep_sgd_ramp.json", "sgd", -4.0), ("sweep_rvr_ramp.json", "sgd_hvp_rvr", -3.0)] {
            let cfg = config(file);
            let runs = run_grid(&cfg).expect("sweep runs");
            let s = summarize(&cfg, &runs);
            let (slope, r2) = s.fit.map_or((f64::NAN, f64::NAN), |f| (f.slope, f.r_squared));
            out.push(PropertyCheck::at_most("sweep", format!("{name}_slope_distance_from_{want}"), (slope - want).abs(), 0.4));
            out.push(PropertyCheck::at_least("sweep", format!("{name}_r_squared"), r2, 0.9));
            out.push(PropertyCheck::at_least("sweep", format!("{name}_grid_points_fitted"), s.medians.len() as f64, 4.0));
        }
        out
    });
}

#[test]
fn ac04_descent_lemmas() {
    criterion("AC4", "gradient and cubic descent inequalities, zero failures", "derived", 60.0, || {
        vec![gradient_descent_lemma(1_000, SEED), cubic_descent_lemma(1_000, SEED)]
    });
}

#[test]
fn ac05_matrix_concentration() {
    criterion("AC5", "E||mean - B||^2 <= 22 sigma^2 ln(d)/n", "derived", 120.0, || {
        vec![matrix_concentration(10, 100, 1.0, 500, SEED), matrix_concentration(50, 200, 0.5, 500, SEED)]
    });
}

#[test]
fn ac06_cubic_subproblem() {
    criterion("AC6", "cubic KKT residual <= 1e-8 and brute-force gap <= 1e-6", "derived", 120.0, || {
        let mut out = cubic_kkt(1_000, SEED);
        out.push(cubic_brute_force(30, 100_000, SEED));
        out
    });
}

#[test]
fn ac07_oja_contract() {
    criterion("AC7", "curvature search certificates >= 90% over 100 seeds", "derived", 180.0, || {
        vec![oja_negative(100, 50, 0.05, 0.2, SEED), oja_psd(100, 50, 0.05, SEED)]
    });
}

#[test]
fn ac08_sosp_output_quality() {
    // Formula horizons on this instance need 1e9+ queries per run, so T, p and
    // the search failure probability are overridden in the configs.
    criterion("AC8", "second-order stationary outputs in >= 50% of 40 runs", "tuned", 1_800.0, || {
        let mut out = Vec::new();
        for (file, name, grad_mult) in [("solve_sosp_hvp_saddle.json", "sosp_hvp", 8.0), ("solve_sosp_cubic_saddle.json", "sosp_cubic", 450.0)] {
            let cfg = config(file);
            let eps = cfg.epsilon_grid[0];
            let gamma = cfg.solver.as_ref().and_then(|s| s.gamma).expect("gamma");
            let runs = run_grid(&cfg).expect("solve runs");
            let good = runs
                .iter()
                .filter(|(_, _, o)| match o {
                    RunOutcome::Done(r) => {
                        r.result.grad_norm_exact <= grad_mult * eps && r.result.lambda_min_exact >= -4.0 * gamma
                    }
                    RunOutcome::Skipped(_) => false,
                })
                .count();
            out.push(PropertyCheck::at_least("solvers", format!("{name}_success_fraction"), good as f64 / runs.len() as f64, 0.5));
        }
        out
    });
}

#[test]
fn ac09_hard_instance_structure() {
    criterion("AC9", "hard-instance structural audits", "derived", 300.0, || hard_suite(SEED));
}

#[test]
fn ac10_progress_lemma() {
    criterion("AC10", "zero-respecting progress deadline and median completion", "derived", 300.0, || {
        let cfg = config("lowerbound_progress.json");
        let spec = cfg.lowerbound.as_ref().expect("lowerbound section");
        let (_, s) = lower_bound(spec, cfg.replications, cfg.seed).expect("simulation");
        vec![
            PropertyCheck::at_most("lowerbound", "deadline_failure_fraction", s.deadline_failure_fraction, 2.0 * s.delta),
            PropertyCheck::at_least("lowerbound", "median_completion", s.median_completion, 0.8 * s.progress_bound),
            PropertyCheck::at_least("lowerbound", "runs", s.runs as f64, 500.0),
        ]
    });
}
