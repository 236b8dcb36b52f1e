use hvpopt::linalg::SymMatrix;
use hvpopt::objective::{LambdaSum, Quadratic};
use hvpopt::oracle::{NoiseParams, ProblemInstance, RegularityParams};
use hvpopt::solvers::*;
use hvpopt::Error;
use std::sync::Arc;

fn quadratic(d: usize, delta: f64, l1: f64, l2: f64, noise: NoiseParams<f64>) -> ProblemInstance<f64> {
    let a = SymMatrix::from_fn(d, |i, j| if i == j { 0.5 + i as f64 * 0.25 } else { 0.0 });
    let b = (0..d).map(|i| 1.0 - 0.3 * i as f64).collect();
    ProblemInstance::new(Arc::new(Quadratic::new(a, b)), RegularityParams::new(delta, l1, l2).unwrap(), noise).unwrap()
}

fn unit(d: usize) -> ProblemInstance<f64> {
    quadratic(d, 1.0, 1.0, 1.0, NoiseParams::new(1.0, 1.0))
}

#[test]
fn sgd_rvr_parameters() {
    let i = unit(1);
    let p = SgdRvrParams::derive(&SolverParams::new(0.01), &i.regularity, &i.noise).unwrap();
    let eta = 1.0 / (2.0 * 2.01f64.sqrt());
    assert!((p.eta - eta).abs() < 1e-15);
    assert!((p.eta - 0.35267).abs() < 5e-6);
    assert_eq!(p.t as f64, (2.0 / (eta * 1e-4)).ceil());
    assert_eq!(p.t, 56_710);
    assert!((p.b - eta * 0.01 * 1.01f64.sqrt()).abs() < 1e-15);
}

#[test]
fn noiseless_gradients_force_full_resets() {
    let i = quadratic(2, 1.0, 1.0, 1.0, NoiseParams::new(0.0, 1.0));
    let p = SgdRvrParams::derive(&SolverParams::new(0.1), &i.regularity, &i.noise).unwrap();
    assert_eq!(p.b, 1.0);
}

#[test]
fn cubic_rvr_parameters() {
    let i = unit(10);
    let p = CubicRvrParams::derive(&SolverParams::new(0.1), &i.regularity, &i.noise, 10).unwrap();
    let ln10 = 10f64.ln();
    assert_eq!(p.m, 5.0);
    assert!((p.eta - 25.0 * 0.02f64.sqrt()).abs() < 1e-14);
    assert_eq!(p.n_h as f64, (22.0 * p.eta * p.eta * ln10 / 0.01).ceil());
    assert_eq!(p.log_d, ln10);
}

#[test]
fn log_dim_is_at_least_one() {
    assert_eq!(log_dim::<f64>(1), 1.0);
    assert_eq!(log_dim::<f64>(2), 1.0);
    assert_eq!(log_dim::<f64>(100), 100f64.ln());
}

#[test]
fn sosp_branch_probabilities() {
    let i = quadratic(3, 1.0, 1.0, 1.0, NoiseParams::new(1.0, 1.0).with_almost_sure_bound());
    let o4 = Overrides { eta: Some(0.25), ..Overrides::default() };
    let p4 = SospHvpParams::derive(&SolverParams::new(0.1).with_gamma(0.5).with_overrides(o4), &i.regularity, &i.noise).unwrap();
    assert!((p4.p - 0.125 / 0.15).abs() < 1e-15);
    let o5 = Overrides { m: Some(4.0), ..Overrides::default() };
    let p5 = SospCubicParams::derive(&SolverParams::new(0.1).with_gamma(0.4).with_overrides(o5), &i.regularity, &i.noise, 3).unwrap();
    let a = 2.0 * 0.4f64.powf(1.5);
    assert!((p5.p - a / (a + 540.0 * 0.1f64.powf(1.5))).abs() < 1e-14);
    assert!((p5.p - 0.0288).abs() < 5e-5);
}

#[test]
fn overrides_feed_later_formulas() {
    let i = unit(1);
    let o = Overrides { eta: Some(0.1), ..Overrides::default() };
    let sp = SolverParams::new(0.01).with_overrides(o);
    let p = SgdRvrParams::derive(&sp, &i.regularity, &i.noise).unwrap();
    assert_eq!(p.eta, 0.1);
    assert_eq!(p.t as f64, (2.0 / (0.1 * 1e-4f64)).ceil());
    assert_eq!(sp.mode(), ParamMode::Tuned);
    assert_eq!(SolverParams::<f64>::new(0.1).mode(), ParamMode::Theory);
}

#[test]
fn curvature_search_needs_gamma_and_bound() {
    let i = unit(2);
    assert!(matches!(sosp_hvp(&i, &SolverParams::new(0.1), 0, &RunOptions::default()), Err(Error::Config(_))));
    assert!(matches!(
        sosp_hvp(&i, &SolverParams::new(0.1).with_gamma(0.5), 0, &RunOptions::default()),
        Err(Error::Contract(_))
    ));
}

#[test]
fn zero_horizon_returns_the_start() {
    let i = unit(2);
    let r = sgd_baseline(&i, 0.1, 0.1, 0, 1, &RunOptions::default()).unwrap();
    assert_eq!(r.output_point, vec![0.0, 0.0]);
    assert_eq!(r.ledger.total(), 0);
}

#[test]
fn budget_cap_refuses_oversized_runs() {
    let i = unit(2);
    let opts = RunOptions { budget_cap: 1_000, ..RunOptions::default() };
    assert!(matches!(sgd_hvp_rvr(&i, &SolverParams::new(0.01), 1, &opts), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn every_solver_converges_without_noise() {
    let i = quadratic(4, 2.0, 1.25, 1.0, NoiseParams::zero());
    let eps = 1e-2;
    let p = SolverParams::new(eps);
    let pg = SolverParams::new(eps).with_gamma(0.5);
    let opts = RunOptions::default();
    let runs = [
        sgd_baseline(&i, eps, 0.4, 2_000, 3, &opts).unwrap(),
        sgd_hvp_rvr(&i, &p, 3, &opts).unwrap(),
        cubic_rvr(&i, &p, 3, &opts).unwrap(),
        sosp_hvp(&i, &pg, 3, &opts).unwrap(),
        sosp_cubic(&i, &pg, 3, &opts).unwrap(),
    ];
    for r in runs {
        assert!(r.grad_norm_exact <= eps, "{}: {}", r.algorithm, r.grad_norm_exact);
        assert!(r.lambda_min_exact > 0.0);
        assert!(r.output_index <= r.iterations);
    }
}

fn noisy_lambda_sum() -> ProblemInstance<f64> {
    let f = LambdaSum::scaled(vec![0.3, -0.6, 0.9], 1.0, 1.0);
    let reg = RegularityParams::new(f.gap_at_origin(), f.gradient_lipschitz(), f.hessian_lipschitz()).unwrap();
    ProblemInstance::new(Arc::new(f), reg, NoiseParams::new(1.0, 1.0).with_almost_sure_bound()).unwrap()
}

#[test]
fn runs_are_reproducible_and_accounted() {
    let i = noisy_lambda_sum();
    let o = Overrides { t: Some(150), ..Overrides::default() };
    let p = SolverParams::new(0.3).with_gamma(0.5).with_overrides(o);
    let opts = RunOptions { diagnostics: true, ..RunOptions::default() };
    type Solver = fn(&ProblemInstance<f64>, &SolverParams<f64>, u64, &RunOptions) -> hvpopt::Result<RunResult<f64>>;
    let solvers: [Solver; 4] = [sgd_hvp_rvr, cubic_rvr, sosp_hvp, sosp_cubic];
    for s in solvers {
        let a = s(&i, &p, 17, &opts).unwrap();
        let b = s(&i, &p, 17, &opts).unwrap();
        assert_eq!(a.output_point, b.output_point);
        assert_eq!(a.ledger, b.ledger);
        assert_eq!(a.diagnostics.unwrap().accounted_queries, a.ledger.total(), "{}", a.algorithm);
        assert_eq!(a.mode, ParamMode::Tuned);
    }
}

#[test]
fn first_passage_stops_the_run() {
    let i = noisy_lambda_sum();
    let opts = RunOptions {
        first_passage: Some(PassageRule::GradNorm(0.3)),
        stop_at_first_passage: true,
        ..RunOptions::default()
    };
    let r = sgd_hvp_rvr(&i, &SolverParams::new(0.1), 5, &opts).unwrap();
    let fp = r.first_passage.expect("threshold reached");
    assert!(r.stopped_early);
    assert!(r.grad_norm_exact <= 0.3);
    assert_eq!(fp.queries, r.ledger.total());
}
