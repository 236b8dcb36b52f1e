use super::{errored, lambda_sum_instance, quadratic_instance, random_quadratic, rng_for, PropertyCheck};
use hvpopt::linalg::{norm, sub};
use hvpopt::objective::Quadratic;
use hvpopt::oracle::{NoiseParams, Oracle, ProblemInstance};
use hvpopt::rng::{algorithm_rng, derive_seed, gaussian_vector, oracle_seed, unit_sphere};
use hvpopt::rvr::{estimate, estimator_error_suite, expected_query_budget, EstimatorState, RvrConfig};
use hvpopt::solvers::{SgdRvrParams, SolverParams};
use rayon::prelude::*;

const SUITE: &str = "hvp_rvr";

pub fn rvr_suite(seed: u64) -> Vec<PropertyCheck> {
    let mut out = arithmetic_examples();
    out.push(estimator_error(20, 300, 8, seed));
    out.extend(query_budget(2_000, seed));
    out.push(fresh_start_error(seed));
    out.extend(path_bias(seed));
    out.push(quadratic_exactness(seed));
    out.push(query_determinism(seed));
    out
}

fn cfg(epsilon: f64, b: f64, s1: f64, s2: f64, l2: f64) -> RvrConfig<f64> {
    RvrConfig { epsilon, reset_prob: b, sigma1: s1, sigma2: s2, l2 }
}

/// Batch and path sizes and the query bound at hand-computed points.
pub fn arithmetic_examples() -> Vec<PropertyCheck> {
    let c = cfg(0.1, 0.5, 1.0, 1.0, 1.0);
    let k = c.path_steps(0.1).map(|k| k as f64).unwrap_or(f64::NAN);
    let c2 = cfg(0.1, 1.0, 0.1, 1.0, 1.0);
    vec![
        PropertyCheck::at_most(SUITE, "batch_size_example", (c.batch_size() as f64 - 500.0).abs(), 0.0),
        PropertyCheck::at_most(SUITE, "path_steps_example", (k - 11.0).abs(), 0.0),
        // 6·(1 + 0.5/0.01 + 1.1·0.01/(0.5·0.01)) = 6·53.2
        PropertyCheck::at_most(SUITE, "budget_example_319", (expected_query_budget(&c, 0.1) - 319.2).abs(), 1e-9),
        PropertyCheck::at_most(SUITE, "budget_example_12", (expected_query_budget(&c2, 0.0) - 12.0).abs(), 1e-12),
    ]
}

/// Mean squared estimator error along SGD trajectories on the Λ-sum with
/// `σ₁ = σ₂ = 1`, `ε = 0.1` and the step and reset probability of the
/// SGD-with-RVR solver. Limit `1.2ε²`.
pub fn estimator_error(d: usize, steps: usize, reps: usize, seed: u64) -> PropertyCheck {
    let eps = 0.1;
    let inst = lambda_sum_instance(d, NoiseParams::new(1.0, 1.0));
    let p = match SgdRvrParams::derive(&SolverParams::new(eps), &inst.regularity, &inst.noise) {
        Ok(p) => p,
        Err(e) => return errored(SUITE, "estimator_mean_sq_error", e),
    };
    let c = cfg(eps, p.b, 1.0, 1.0, inst.regularity.l2);
    let eta = p.eta;
    let x0 = vec![0.0; d];
    let means: Result<Vec<f64>, _> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let next = |x: &[f64], g: &[f64]| x.iter().zip(g).map(|(a, b)| a - eta * b).collect();
            estimator_error_suite(&inst, next, &x0, &c, steps, 1, derive_seed(seed, r as u64)).map(|s| s.overall_mean)
        })
        .collect();
    match means {
        Ok(m) => PropertyCheck::at_most(
            SUITE,
            format!("estimator_mean_sq_error_d{d}_{steps}x{reps}"),
            m.iter().sum::<f64>() / reps as f64,
            1.2 * eps * eps,
        ),
        Err(e) => errored(SUITE, "estimator_mean_sq_error", e),
    }
}

/// `(label, σ₁, σ₂, L₂, ε, b, ‖Δx‖)` of the query-budget probes.
pub const BUDGET_POINTS: [(&str, f64, f64, f64, f64, f64, f64); 3] = [
    ("balanced", 1.0, 1.0, 1.0, 0.1, 0.5, 0.1),
    ("fresh_only", 0.1, 1.0, 1.0, 0.1, 1.0, 0.0),
    ("rare_reset", 2.0, 0.5, 3.0, 0.2, 0.05, 0.02),
];

/// Mean queries per call when alternating between two points at fixed
/// distance, against `6(1 + bσ₁²/ε² + (σ₂² + L₂ε)‖Δx‖²/(bε²))`.
pub fn query_budget(calls: usize, seed: u64) -> Vec<PropertyCheck> {
    BUDGET_POINTS
        .iter()
        .enumerate()
        .map(|(i, &(label, s1, s2, l2, eps, b, dx))| {
            let mut rng = rng_for(seed, 20 + i as u64);
            let d = 3;
            let inst = quadratic_instance(random_quadratic(d, &mut rng), NoiseParams::new(s1, s2));
            let c = cfg(eps, b, s1, s2, l2);
            let xa: Vec<f64> = gaussian_vector(&mut rng, d);
            let dir: Vec<f64> = unit_sphere(&mut rng, d);
            let xb: Vec<f64> = xa.iter().zip(&dir).map(|(a, u)| a + dx * u).collect();
            let mut o = inst.oracle(oracle_seed(seed));
            let mut arng = algorithm_rng(seed);
            let mut st = EstimatorState::new();
            for k in 0..calls {
                let x = if k % 2 == 0 { &xa } else { &xb };
                if let Err(e) = estimate(&mut st, x, &c, &mut o, &mut arng) {
                    return errored(SUITE, label, e);
                }
            }
            let mean = o.ledger().total() as f64 / calls as f64;
            PropertyCheck::at_most(SUITE, format!("queries_per_call_{label}"), mean, expected_query_budget(&c, dx))
        })
        .collect()
}

/// With `b = 1` every call is a fresh mean of `n` draws: error `σ₁²/n ≤ ε²/5`.
pub fn fresh_start_error(seed: u64) -> PropertyCheck {
    let eps = 0.1;
    let inst = lambda_sum_instance(10, NoiseParams::new(1.0, 1.0));
    let c = cfg(eps, 1.0, 1.0, 1.0, inst.regularity.l2);
    let next = |x: &[f64], _: &[f64]| x.iter().map(|a| a + 0.01).collect();
    match estimator_error_suite(&inst, next, &[0.0; 10], &c, 500, 4, seed) {
        Ok(r) => PropertyCheck::at_most(SUITE, "fresh_start_error_at_most_eps2_over_5", r.overall_mean, 1.1 * eps * eps / 5.0),
        Err(e) => errored(SUITE, "fresh_start_error", e),
    }
}

/// One noiseless transport step from an exact state: bias against the
/// Taylor bound `L₂‖Δx‖²/(2K)` and the reset-scaled `bε/10` it implies.
pub fn path_bias(seed: u64) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 30);
    let d = 3;
    let eps = 0.1;
    let b = 0.2;
    let inst = lambda_sum_instance(d, NoiseParams::new(1.0, 0.0));
    let l2 = inst.regularity.l2;
    let c = cfg(eps, b, 1.0, 0.0, l2);
    let (mut worst_taylor, mut worst_reset, mut worst_tight) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    let mut o = inst.oracle(seed);
    let mut arng = algorithm_rng(seed);
    let mut probes = 0;
    while probes < 200 {
        let xp: Vec<f64> = (0..d).map(|_| rand::Rng::random_range(&mut rng, -2.0..2.0)).collect();
        let u: Vec<f64> = unit_sphere(&mut rng, d);
        let step = rand::Rng::random_range(&mut rng, 0.05..0.5);
        let x: Vec<f64> = xp.iter().zip(&u).map(|(a, v)| a + step * v).collect();
        let mut st = EstimatorState { x_prev: Some(xp.clone()), g_prev: Some(inst.objective.gradient(&xp)) };
        let (g, info) = match estimate(&mut st, &x, &c, &mut o, &mut arng) {
            Ok(v) => v,
            Err(e) => return vec![errored(SUITE, "path_bias", e)],
        };
        if info.fresh || info.queries == 0 {
            continue;
        }
        probes += 1;
        let bias = norm(&sub(&g, &inst.objective.gradient(&x)));
        let taylor = l2 * step * step / (2.0 * info.queries as f64);
        worst_taylor = worst_taylor.max(bias - taylor);
        worst_reset = worst_reset.max(bias / (b * eps / 10.0));
        worst_tight = worst_tight.max(bias / (b * eps / 50.0));
    }
    vec![
        PropertyCheck::at_most(SUITE, "path_bias_within_taylor_bound", worst_taylor, 1e-12),
        PropertyCheck::at_most(SUITE, "path_bias_over_b_eps_div_10", worst_reset, 1.0),
        // The step count only implies the bε/10 bound; the tighter one is reported.
        PropertyCheck::at_most(SUITE, "path_bias_over_b_eps_div_50", worst_tight, 1.0).informational(),
    ]
}

/// Zero noise on a quadratic: transport from an exact state is exact.
pub fn quadratic_exactness(seed: u64) -> PropertyCheck {
    let mut rng = rng_for(seed, 31);
    let d = 4;
    let q: Quadratic<f64> = random_quadratic(d, &mut rng);
    let inst: ProblemInstance<f64> = quadratic_instance(q, NoiseParams::new(0.0, 0.0));
    let c = cfg(0.1, 0.5, 0.0, 0.0, 1.0);
    let mut o = inst.oracle(seed);
    let mut arng = algorithm_rng(seed);
    let mut st = EstimatorState::new();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let x: Vec<f64> = gaussian_vector(&mut rng, d);
        match estimate(&mut st, &x, &c, &mut o, &mut arng) {
            Ok((g, _)) => {
                let e = inst.objective.gradient(&x);
                worst = worst.max(norm(&sub(&g, &e)) / norm(&e).max(1.0));
            }
            Err(e) => return errored(SUITE, "quadratic_exactness", e),
        }
    }
    PropertyCheck::at_most(SUITE, "transport_exact_on_quadratic", worst, 1e-9)
}

/// Identical seeds give identical ledger sequences and estimates.
pub fn query_determinism(seed: u64) -> PropertyCheck {
    let inst = lambda_sum_instance(4, NoiseParams::new(1.0, 1.0));
    let c = cfg(0.2, 0.3, 1.0, 1.0, inst.regularity.l2);
    let run = || {
        let mut o = inst.oracle(oracle_seed(seed));
        let mut arng = algorithm_rng(seed);
        let mut st = EstimatorState::new();
        let mut x = vec![0.0; 4];
        let mut trace = Vec::new();
        for _ in 0..100 {
            let (g, info) = estimate(&mut st, &x, &c, &mut o, &mut arng).expect("estimate");
            trace.push((info.queries, g.iter().map(|v| v.to_bits()).collect::<Vec<_>>()));
            x.iter_mut().zip(&g).for_each(|(a, b)| *a -= 0.05 * b);
        }
        trace
    };
    let same = run() == run();
    PropertyCheck::at_least(SUITE, "query_sequence_reproducible", same as u8 as f64, 1.0)
}
