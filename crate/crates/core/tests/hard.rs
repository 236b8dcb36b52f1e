use hvpopt::hard::zero_chain::support;
use hvpopt::hard::*;
use hvpopt::Error;
use proptest::prelude::*;

const E: f64 = std::f64::consts::E;

#[test]
fn component_values() {
    assert_eq!(psi(0.5, 0), 0.0);
    assert_eq!(psi(0.3, 1), 0.0);
    assert!((psi(1.0f64, 0) - 1.0).abs() < 1e-15);
    assert!((psi(0.75, 0) - (-3f64).exp()).abs() < 1e-15);
    assert!((phi(0.0, 1) - E.sqrt()).abs() < 1e-15);
    assert!((phi(0.0f64, 0) - 2.066366).abs() < 1e-6);
    assert_eq!(lambda_fn(0.0, 0), 0.0);
    assert!((lambda_fn(0.0f64, 2) + 8.0).abs() < 1e-15);
    assert!((lambda_fn(60.0f64, 0) + 8.0).abs() < 1e-12);
    assert!((lambda_fn(-60.0f64, 0) + 8.0).abs() < 1e-12);
}

#[test]
fn chains_at_the_origin() {
    let f = ChainFunction::<f64>::unscaled(ChainKind::EpsChain, 6).eval(&[0.0; 6]);
    assert!((f.value + phi(0.0, 0)).abs() < 1e-14);
    assert!((f.gradient[0] + E.sqrt()).abs() < 1e-15);
    assert!(f.gradient[1..].iter().all(|&g| g == 0.0));
    let g = ChainFunction::<f64>::unscaled(ChainKind::GammaChain, 6).eval(&[0.0; 6]);
    assert_eq!(g.value, 0.0);
    assert!((g.hessian.diag[0] + 8.0).abs() < 1e-14);
    assert!(g.hessian.lambda_min() <= -8.0 + 1e-12);
}

#[test]
fn progress_examples() {
    assert_eq!(prog(&[0.3, 0.6, 0.0, 0.0], 0.5), 2);
    assert_eq!(prog(&[0.0; 4], 0.9), 0);
    assert_eq!(prog(&[1.0, 0.0, 2.0, 0.0], 0.0), 3);
}

#[test]
fn deterministic_revelation_takes_exactly_t_queries() {
    let chain = ChainFunction::<f64>::unscaled(ChainKind::EpsChain, 10);
    let mut o = ZeroChainOracle::new(chain, 1.0, 3).unwrap();
    let tr = zero_respecting_run(&mut o, 1_000).unwrap();
    assert_eq!(tr.completed_at, Some(10));
    assert_eq!(tr.final_progress, 10);
    assert_eq!(o.ledger().total(), 10);
}

#[test]
fn deadline_formula() {
    assert!((progress_deadline(20, 0.01, 0.1) - (20.0 - 10f64.ln()) / 0.02).abs() < 1e-9);
    assert!((progress_deadline(20, 0.01, 0.1) - 884.87).abs() < 0.01);
}

#[test]
fn revealed_slice_is_zero_or_scaled_by_inverse_rho() {
    let chain = ChainFunction::<f64>::unscaled(ChainKind::EpsChain, 5);
    let x = [1.0, -0.8, 0.1, 0.0, 0.0];
    let exact = chain.eval(&x).gradient;
    let mut o = ZeroChainOracle::new(chain, 0.5, 9).unwrap();
    let (mut zeros, mut doubled) = (0, 0);
    for _ in 0..400 {
        let ChainDerivative::Gradient(g) = o.query(&x, 1).unwrap() else { panic!("gradient expected") };
        assert_eq!(&g[..2], &exact[..2]);
        if g[2] == 0.0 {
            zeros += 1;
        } else {
            assert!((g[2] - 2.0 * exact[2]).abs() < 1e-14);
            doubled += 1;
        }
        assert!(g[3..].iter().all(|&v| v == 0.0));
    }
    assert!(zeros > 100 && doubled > 100);
}

#[test]
fn invalid_rho_is_rejected() {
    let chain = ChainFunction::<f64>::unscaled(ChainKind::EpsChain, 5);
    assert!(ZeroChainOracle::new(chain, 0.0, 1).is_err());
    assert!(ZeroChainOracle::new(chain, 1.5, 1).is_err());
}

#[test]
fn recipes_meet_their_targets() {
    let e = build_eps_hard_instance::<f64>(0.1, 1.0, 1.0, 10.0, 1.0, 2_000.0).unwrap();
    assert!(e.recipe.all_satisfied(), "{:?}", e.recipe);
    assert!(e.chain.t >= 3 && e.rho > 0.0 && e.rho < 1.0);
    let g = build_gamma_hard_instance::<f64>(0.1, 1.0, 1.0, 4e8).unwrap();
    assert!(g.recipe.all_satisfied(), "{:?}", g.recipe);
    // The search-threshold rate gives exactly λ_min ≤ −5γ/2 at the origin.
    assert!(g.chain.eval(&vec![0.0; g.chain.t]).hessian.lambda_min() <= -0.1);
}

#[test]
fn deterministic_boundary_of_the_revelation_rate() {
    let c = chain_constants(ChainKind::EpsChain);
    let e = build_eps_hard_instance::<f64>(0.1, 1.0, 1.0, 2.0 * 0.1 * c.l0, 1.0, 500.0).unwrap();
    assert_eq!(e.rho, 1.0);
}

#[test]
fn short_chains_are_refused() {
    assert!(matches!(build_eps_hard_instance::<f64>(0.1, 1.0, 1.0, 1.0, 1.0, 1.0), Err(Error::Degenerate(_))));
}

proptest! {
    #[test]
    fn answers_never_reach_past_the_next_coordinate(
        y in prop::collection::vec(-2.0f64..2.0, 8),
        keep in 0usize..9,
        seed in 0u64..10_000,
        gamma_chain in any::<bool>(),
    ) {
        // Zero the tail so every progress level is exercised.
        let y: Vec<f64> = y.iter().enumerate().map(|(i, v)| if i < keep { *v } else { 0.0 }).collect();
        let kind = if gamma_chain { ChainKind::GammaChain } else { ChainKind::EpsChain };
        let beta = 0.5;
        let chain = ChainFunction::<f64>::scaled(kind, 8, 2.0, beta);
        let mut o = ZeroChainOracle::new(chain, 0.3, seed).unwrap();
        let x: Vec<f64> = y.iter().map(|v| v / beta).collect();
        let p = o.progress(&x);
        let a = o.query_all(&x).unwrap();
        prop_assert!(support(&a.gradient) <= p + 1);
        prop_assert!(a.hessian.support() <= p + 1);
    }

    #[test]
    fn chain_hessian_is_tridiagonal(y in prop::collection::vec(-2.0f64..2.0, 6), j in 0usize..6) {
        let f = ChainFunction::<f64>::unscaled(ChainKind::EpsChain, 6);
        let mut p = y.clone();
        p[j] += 1e-3;
        let (a, b) = (f.eval(&p).gradient, f.eval(&y).gradient);
        for i in 0usize..6 {
            if i.abs_diff(j) > 1 {
                prop_assert_eq!(a[i], b[i]);
            }
        }
    }
}
