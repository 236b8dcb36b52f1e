use super::{errored, lambda_sum_instance, quadratic_instance, random_quadratic, rng_for, PropertyCheck};
use hvpopt::objective::Quadratic;
use hvpopt::oracle::{NoiseParams, ProblemInstance, RegularityParams};
use hvpopt::rng::derive_seed;
use hvpopt::solvers::{
    cubic_rvr, sgd_baseline, sgd_hvp_rvr, sosp_cubic, sosp_hvp, CubicRvrParams, Overrides, RunOptions, SgdRvrParams,
    SolverParams, SospCubicParams, SospHvpParams,
};
use rayon::prelude::*;
use std::sync::Arc;

const SUITE: &str = "solvers";

pub fn solver_suite(seed: u64) -> Vec<PropertyCheck> {
    let mut out = parameter_examples();
    out.extend(zero_noise_quadratic(seed));
    out.push(telescoped_descent(seed));
    out.push(ledger_consistency(seed));
    out.push(output_uniformity(2_000, seed));
    out.push(sgd_rvr_stationarity(16, seed));
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn unit_instance(dim: usize, delta: f64, l1: f64, l2: f64, s1: f64, s2: f64) -> ProblemInstance<f64> {
    ProblemInstance::new(
        Arc::new(Quadratic::isotropic(dim, 1.0)),
        RegularityParams { delta, l1, l2 },
        NoiseParams::new(s1, s2).with_almost_sure_bound(),
    )
    .expect("valid instance")
}

/// Derived parameters against independent recomputation of each formula.
pub fn parameter_examples() -> Vec<PropertyCheck> {
    let mut out = Vec::new();
    // Δ = L₁ = L₂ = σ₁ = σ₂ = 1, ε = 0.01.
    let i2 = unit_instance(1, 1.0, 1.0, 1.0, 1.0, 1.0);
    match SgdRvrParams::derive(&SolverParams::new(0.01), &i2.regularity, &i2.noise) {
        Ok(p) => {
            let eta = 1.0 / (2.0 * 2.01f64.sqrt());
            let t = (2.0 / (eta * 1e-4)).ceil();
            let b = (eta * 0.01 * 1.01f64.sqrt()).min(1.0);
            out.push(PropertyCheck::at_most(SUITE, "sgd_rvr_eta", rel(p.eta, eta), 1e-15));
            out.push(PropertyCheck::at_most(SUITE, "sgd_rvr_eta_rounded", (p.eta - 0.35267).abs(), 5e-6));
            out.push(PropertyCheck::at_most(SUITE, "sgd_rvr_horizon", (p.t as f64 - t).abs(), 0.0));
            out.push(PropertyCheck::at_most(SUITE, "sgd_rvr_horizon_value", (p.t as f64 - 56710.0).abs(), 0.0));
            out.push(PropertyCheck::at_most(SUITE, "sgd_rvr_reset", rel(p.b, b), 1e-15));
        }
        Err(e) => out.push(errored(SUITE, "sgd_rvr_params", e)),
    }
    // d = 10, σ₁ = σ₂ = L₂ = 1, ε = 0.1.
    let i3 = unit_instance(10, 1.0, 1.0, 1.0, 1.0, 1.0);
    match CubicRvrParams::derive(&SolverParams::new(0.1), &i3.regularity, &i3.noise, 10) {
        Ok(p) => {
            let ln10 = 10f64.ln();
            let m = 5.0 * 1f64.max(0.1 * ln10);
            let eta = 25.0 * (0.1 / m).sqrt();
            let n_h = (22.0 * eta * eta * ln10 / 0.01).ceil();
            out.push(PropertyCheck::at_most(SUITE, "cubic_rvr_penalty", (p.m - 5.0).abs(), 0.0));
            out.push(PropertyCheck::at_most(SUITE, "cubic_rvr_radius", (p.eta - 3.5355).abs(), 5e-5));
            out.push(PropertyCheck::at_most(SUITE, "cubic_rvr_radius_formula", rel(p.eta, eta), 1e-15));
            out.push(PropertyCheck::at_most(SUITE, "cubic_rvr_hessian_batch", (p.n_h as f64 - n_h).abs(), 0.0));
        }
        Err(e) => out.push(errored(SUITE, "cubic_rvr_params", e)),
    }
    // Δ = 1, L₂ = 1, γ = 0.5, η = 0.25, ε = 0.1.
    let i4 = unit_instance(3, 1.0, 1.0, 1.0, 1.0, 1.0);
    let o4 = Overrides { eta: Some(0.25), ..Overrides::default() };
    match SospHvpParams::derive(&SolverParams::new(0.1).with_gamma(0.5).with_overrides(o4), &i4.regularity, &i4.noise) {
        Ok(p) => out.push(PropertyCheck::at_most(SUITE, "sosp_hvp_branch_probability", (p.p - 0.125 / 0.15).abs(), 1e-15)),
        Err(e) => out.push(errored(SUITE, "sosp_hvp_params", e)),
    }
    // M = 4, γ = 0.4, L₂ = 1, ε = 0.1.
    let o5 = Overrides { m: Some(4.0), ..Overrides::default() };
    match SospCubicParams::derive(&SolverParams::new(0.1).with_gamma(0.4).with_overrides(o5), &i4.regularity, &i4.noise, 3) {
        Ok(p) => {
            let a = 2.0 * 0.4f64.powf(1.5);
            let want = a / (a + 540.0 * 0.1f64.powf(1.5));
            out.push(PropertyCheck::at_most(SUITE, "sosp_cubic_branch_probability", rel(p.p, want), 1e-14));
            out.push(PropertyCheck::at_most(SUITE, "sosp_cubic_branch_probability_value", (p.p - 0.0288).abs(), 5e-5));
        }
        Err(e) => out.push(errored(SUITE, "sosp_cubic_params", e)),
    }
    out
}

/// Every solver reaches `‖∇F‖ ≤ ε` on a noiseless strongly convex quadratic.
pub fn zero_noise_quadratic(seed: u64) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 50);
    let inst = quadratic_instance(random_quadratic(4, &mut rng), NoiseParams::zero());
    let eps = 1e-2;
    let p = SolverParams::new(eps);
    let pg = SolverParams::new(eps).with_gamma(0.5);
    let opts = RunOptions::default();
    let step = 0.5 / inst.regularity.l1;
    let runs = [
        ("sgd", sgd_baseline(&inst, eps, step, 2_000, seed, &opts)),
        ("sgd_hvp_rvr", sgd_hvp_rvr(&inst, &p, seed, &opts)),
        ("cubic_rvr", cubic_rvr(&inst, &p, seed, &opts)),
        ("sosp_hvp", sosp_hvp(&inst, &pg, seed, &opts)),
        ("sosp_cubic", sosp_cubic(&inst, &pg, seed, &opts)),
    ];
    runs.into_iter()
        .map(|(name, r)| match r {
            Ok(r) => PropertyCheck::at_most(SUITE, format!("zero_noise_quadratic_{name}"), r.grad_norm_exact, eps),
            Err(e) => errored(SUITE, name, e),
        })
        .collect()
}

/// Noiseless SGD with the estimator: mean `‖∇F‖²` over the iterates is at most
/// `8Δ/(ηT) + 6·(max estimator error)²`.
pub fn telescoped_descent(seed: u64) -> PropertyCheck {
    let inst = lambda_sum_instance(3, NoiseParams::zero());
    let p = SolverParams::new(0.05);
    let opts = RunOptions { diagnostics: true, ..RunOptions::default() };
    let sp = SgdRvrParams::derive(&p, &inst.regularity, &inst.noise).expect("params");
    match sgd_hvp_rvr(&inst, &p, seed, &opts) {
        Ok(r) => {
            let d = r.diagnostics.unwrap_or_default();
            let bound = 8.0 * inst.regularity.delta / (sp.eta * sp.t as f64) + 6.0 * d.max_estimator_error.powi(2);
            PropertyCheck::at_most(SUITE, "telescoped_descent", d.mean_sq_grad_norm, bound)
        }
        Err(e) => errored(SUITE, "telescoped_descent", e),
    }
}

/// Ledger total equals the per-step declared query counts.
pub fn ledger_consistency(seed: u64) -> PropertyCheck {
    let inst = lambda_sum_instance(3, NoiseParams::new(1.0, 1.0).with_almost_sure_bound());
    let opts = RunOptions { diagnostics: true, ..RunOptions::default() };
    let o = Overrides { t: Some(200), ..Overrides::default() };
    let p = SolverParams::new(0.3).with_gamma(0.5).with_overrides(o);
    let mut worst = 0.0f64;
    for r in [sgd_hvp_rvr(&inst, &p, seed, &opts), cubic_rvr(&inst, &p, seed, &opts), sosp_hvp(&inst, &p, seed, &opts), sosp_cubic(&inst, &p, seed, &opts)] {
        match r {
            Ok(r) => {
                let acc = r.diagnostics.map_or(u64::MAX, |d| d.accounted_queries);
                worst = worst.max((acc as f64 - r.ledger.total() as f64).abs());
            }
            Err(e) => return errored(SUITE, "ledger_consistency", e),
        }
    }
    PropertyCheck::at_most(SUITE, "ledger_equals_accounted_queries", worst, 0.0)
}

/// Chi-square statistic of the output index over `runs` selection seeds with
/// the oracle seed fixed, against the 0.1% critical value with 9 degrees of freedom.
pub fn output_uniformity(runs: usize, seed: u64) -> PropertyCheck {
    let inst = lambda_sum_instance(2, NoiseParams::new(0.5, 0.5));
    let horizon = 10u64;
    let counts: Vec<u64> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let opts = RunOptions { selection_seed: Some(derive_seed(seed, 0x5E + r as u64)), ..RunOptions::default() };
            sgd_baseline(&inst, 0.1, 0.01, horizon, seed, &opts).map(|r| r.output_index).unwrap_or(u64::MAX)
        })
        .fold(|| vec![0u64; horizon as usize], |mut acc, i| {
            if (1..=horizon).contains(&i) {
                acc[(i - 1) as usize] += 1;
            }
            acc
        })
        .reduce(|| vec![0u64; horizon as usize], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    let expected = runs as f64 / horizon as f64;
    let total: u64 = counts.iter().sum();
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let chi2 = if total == runs as u64 { chi2 } else { f64::INFINITY };
    PropertyCheck::at_most(SUITE, "output_index_chi_square", chi2, 27.877)
}

/// Fraction of SGD-with-RVR runs on the Λ-sum ending with `‖∇F‖ ≤ 32ε`.
pub fn sgd_rvr_stationarity(runs: usize, seed: u64) -> PropertyCheck {
    let inst = lambda_sum_instance(2, NoiseParams::new(1.0, 1.0));
    let eps = 0.05;
    let p = SolverParams::new(eps);
    let hits: usize = (0..runs)
        .into_par_iter()
        .map(|r| {
            sgd_hvp_rvr(&inst, &p, derive_seed(seed, r as u64), &RunOptions::default())
                .map_or(0, |res| (res.grad_norm_exact <= 32.0 * eps) as usize)
        })
        .sum();
    PropertyCheck::at_least(SUITE, "sgd_rvr_stationary_fraction_32eps", hits as f64 / runs as f64, 0.7)
}
