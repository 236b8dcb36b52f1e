use hvpopt::linalg::{norm, sub, SymMatrix};
use hvpopt::objective::Quadratic;
use hvpopt::oracle::{NoiseParams, Oracle, ProblemInstance, RegularityParams};
use hvpopt::rvr::{estimate, expected_query_budget, EstimatorState, RvrConfig};
use hvpopt::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn cfg(epsilon: f64, b: f64, s1: f64, s2: f64, l2: f64) -> RvrConfig<f64> {
    RvrConfig { epsilon, reset_prob: b, sigma1: s1, sigma2: s2, l2 }
}

fn quadratic(noise: NoiseParams<f64>) -> ProblemInstance<f64> {
    let a = SymMatrix::from_fn(3, |i, j| if i == j { 1.0 + i as f64 } else { 0.2 });
    let q = Quadratic::new(a, vec![0.5, -1.0, 0.0]);
    ProblemInstance::new(Arc::new(q), RegularityParams::new(10.0, 4.0, 1.0).unwrap(), noise).unwrap()
}

#[test]
fn batch_and_path_sizes() {
    let c = cfg(0.1, 0.5, 1.0, 1.0, 1.0);
    assert_eq!(c.path_steps(0.1).unwrap(), 11);
    assert_eq!(c.batch_size(), 500);
    assert_eq!(c.path_steps(0.0).unwrap(), 0);
}

#[test]
fn noiseless_batch_is_one_sample() {
    assert_eq!(cfg(0.1, 1.0, 0.0, 0.0, 1.0).batch_size(), 1);
}

#[test]
fn query_budget_formula() {
    assert!((expected_query_budget(&cfg(0.1, 1.0, 0.1, 1.0, 1.0), 0.0) - 12.0).abs() < 1e-12);
    // 6·(1 + 0.5·1/0.01 + (1 + 0.1)·0.01/(0.5·0.01))
    assert!((expected_query_budget(&cfg(0.1, 0.5, 1.0, 1.0, 1.0), 0.1) - 319.2).abs() < 1e-9);
}

#[test]
fn path_overflow_is_a_configuration_error() {
    let c = cfg(1e-6, 1e-3, 1.0, 1.0, 1.0);
    assert!(matches!(c.path_steps(1.0), Err(Error::Config(_))));
}

#[test]
fn invalid_reset_probability_rejected() {
    assert!(cfg(0.1, 0.0, 1.0, 1.0, 1.0).validate().is_err());
    assert!(cfg(0.1, 1.5, 1.0, 1.0, 1.0).validate().is_err());
}

#[test]
fn unchanged_point_transports_nothing() {
    let inst = quadratic(NoiseParams::new(1.0, 1.0));
    let mut o = inst.oracle(1);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let x = vec![0.1, 0.2, 0.3];
    let g_prev = vec![1.0, 2.0, 3.0];
    // b close to 0 makes a reset vanishingly unlikely.
    let c = cfg(0.1, 1e-12, 1.0, 1.0, 1.0);
    let mut st = EstimatorState { x_prev: Some(x.clone()), g_prev: Some(g_prev.clone()) };
    let (g, info) = estimate(&mut st, &x, &c, &mut o, &mut rng).unwrap();
    assert_eq!(g, g_prev);
    assert!(!info.fresh);
    assert_eq!(info.queries, 0);
    assert_eq!(o.ledger().total(), 0);
}

#[test]
fn first_call_is_a_fresh_batch() {
    let inst = quadratic(NoiseParams::new(0.3, 0.0));
    let mut o = inst.oracle(1);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let c = cfg(0.1, 1e-6, 0.3, 0.0, 1.0);
    let (_, info) = estimate(&mut EstimatorState::new(), &[0.0; 3], &c, &mut o, &mut rng).unwrap();
    assert!(info.fresh);
    assert_eq!(info.queries, c.batch_size());
    assert_eq!(o.ledger().grad_queries, 45);
}

proptest! {
    #[test]
    fn transport_is_exact_on_noiseless_quadratics(
        xp in prop::collection::vec(-2.0f64..2.0, 3),
        dx in prop::collection::vec(-0.5f64..0.5, 3),
        seed in 0u64..1000,
    ) {
        let inst = quadratic(NoiseParams::zero());
        let mut o = inst.oracle(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = xp.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let c = cfg(0.1, 0.5, 0.0, 0.0, 1.0);
        let mut st = EstimatorState { x_prev: Some(xp.clone()), g_prev: Some(inst.objective.gradient(&xp)) };
        let (g, info) = estimate(&mut st, &x, &c, &mut o, &mut rng).unwrap();
        prop_assert!(norm(&sub(&g, &inst.objective.gradient(&x))) < 1e-12);
        prop_assert_eq!(o.ledger().total(), info.queries);
        prop_assert_eq!(st.x_prev.as_deref(), Some(x.as_slice()));
    }
}
