use hvpopt::linalg::{norm, SymMatrix};
use hvpopt::objective::Quadratic;
use hvpopt::oracle::{NoiseParams, ProblemInstance, RegularityParams};
use hvpopt::rng::unit_sphere;
use hvpopt::subproblems::{exact_curvature_direction, oja_search, signed_curvature_step, solve_cubic_tr, CubicModel};
use hvpopt::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn model(g: Vec<f64>, h: SymMatrix<f64>, m: f64, radius: f64) -> CubicModel<f64> {
    CubicModel { g, h, m, radius }
}

#[test]
fn interior_cubic_step_solves_the_scalar_secular_equation() {
    let s = solve_cubic_tr(&model(vec![1.0, 0.0], SymMatrix::identity(2), 2.0, 10.0), 1e-12).unwrap();
    let theta = (5f64.sqrt() - 1.0) / 2.0;
    assert!((s.step[0] + theta).abs() < 1e-10 && s.step[1].abs() < 1e-14);
    assert!(!s.boundary);
}

#[test]
fn small_radius_puts_the_step_on_the_boundary() {
    let s = solve_cubic_tr(&model(vec![1.0, 0.0], SymMatrix::identity(2), 2.0, 0.1), 1e-12).unwrap();
    assert!((s.step[0] + 0.1).abs() < 1e-10 && s.step[1].abs() < 1e-14);
    assert!(s.boundary && s.multiplier > 0.0);
}

#[test]
fn hard_case_picks_the_bottom_eigenvector() {
    let m = model(vec![0.0, 0.0], SymMatrix::from_diag(&[-1.0, 1.0]), 2.0, 10.0);
    let s = solve_cubic_tr(&m, 1e-12).unwrap();
    assert!(s.hard_case);
    assert!((s.step[0].abs() - 1.0).abs() < 1e-10 && s.step[1].abs() < 1e-12);
    assert!((m.value(&s.step) + 1.0 / 6.0).abs() < 1e-10);
}

fn model_strategy() -> impl Strategy<Value = CubicModel<f64>> {
    (1usize..4)
        .prop_flat_map(|d| {
            (
                prop::collection::vec(-2.0f64..2.0, d),
                prop::collection::vec(-3.0f64..3.0, d * d),
                0.1f64..5.0,
                0.05f64..3.0,
                any::<bool>(),
            )
        })
        .prop_map(|(g, h, m, r, zero_g)| {
            let d = g.len();
            let h = SymMatrix::from_fn(d, |i, j| (h[i * d + j] + h[j * d + i]) / 2.0);
            // A zero gradient with an indefinite Hessian exercises the hard case.
            model(if zero_g { vec![0.0; d] } else { g }, h, m, r)
        })
}

proptest! {
    #[test]
    fn cubic_solution_satisfies_kkt(m in model_strategy()) {
        let s = solve_cubic_tr(&m, 1e-12).unwrap();
        prop_assert!(norm(&s.step) <= m.radius * (1.0 + 1e-12));
        prop_assert!(s.multiplier >= 0.0);
        prop_assert!(m.kkt_residual(&s.step, s.multiplier) <= 1e-8 * (1.0 + norm(&m.g)));
        // Second-order condition of the global minimiser.
        let shift = m.m / 2.0 * norm(&s.step) + s.multiplier;
        prop_assert!(m.h.lambda_min() + shift >= -1e-8);
    }

    #[test]
    fn cubic_solution_beats_random_feasible_points(m in model_strategy(), seed in 0u64..1000) {
        let s = solve_cubic_tr(&m, 1e-12).unwrap();
        let best = m.value(&s.step);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = m.g.len();
        for _ in 0..2_000 {
            let u: Vec<f64> = unit_sphere(&mut rng, d);
            let r = m.radius * rng.random::<f64>().powf(1.0 / d as f64);
            let p: Vec<f64> = u.iter().map(|v| r * v).collect();
            prop_assert!(best <= m.value(&p) + 1e-9);
        }
    }
}

#[test]
fn curvature_direction_examples() {
    let u = exact_curvature_direction::<f64>(&SymMatrix::from_diag(&[-1.0, 2.0]), 0.2).unwrap();
    assert!((u[0].abs() - 1.0).abs() < 1e-12 && u[1].abs() < 1e-12);
    assert!(exact_curvature_direction::<f64>(&SymMatrix::identity(3), 0.1).is_none());
    // λ_min = −4γ exactly is accepted.
    assert!(exact_curvature_direction::<f64>(&SymMatrix::from_diag(&[-0.5, 1.0]), 0.125).is_some());
}

#[test]
fn signed_curvature_step_example() {
    let x = signed_curvature_step(&[1.0, 1.0], &[1.0, 0.0], 0.5, 1.0, 1.0);
    assert_eq!(x, vec![1.5, 1.0]);
}

fn fixed_hessian(diag: Vec<f64>, noise: NoiseParams<f64>) -> ProblemInstance<f64> {
    let d = diag.len();
    let q = Quadratic::new(SymMatrix::from_diag(&diag), vec![0.0; d]);
    ProblemInstance::new(Arc::new(q), RegularityParams::new(1.0, 1.0, 1.0).unwrap(), noise).unwrap()
}

#[test]
fn noiseless_search_certifies_negative_curvature() {
    let mut diag = vec![0.1; 20];
    diag[0] = -0.9;
    let inst = fixed_hessian(diag, NoiseParams::zero());
    for seed in 0..10 {
        let mut o = inst.oracle(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = oja_search(&mut o, &[0.0; 20], 0.1, 0.05, &inst.regularity, &mut rng).unwrap();
        let u = c.direction.expect("certificate");
        assert!((norm(&u) - 1.0).abs() < 1e-10);
        assert!(inst.objective.hessian(&[0.0; 20]).quad_form(&u) <= -0.2);
    }
}

#[test]
fn search_returns_none_on_psd_hessian() {
    let inst = fixed_hessian(vec![0.5; 10], NoiseParams::new(0.0, 0.2).with_almost_sure_bound());
    let mut o = inst.oracle(3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = oja_search(&mut o, &[0.0; 10], 0.1, 0.05, &inst.regularity, &mut rng).unwrap();
    assert!(c.direction.is_none());
    assert!(c.queries_used > 0);
}

#[test]
fn search_needs_an_almost_sure_bound() {
    let inst = fixed_hessian(vec![0.5; 3], NoiseParams::new(0.0, 0.2));
    let mut o = inst.oracle(3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = oja_search(&mut o, &[0.0; 3], 0.1, 0.05, &inst.regularity, &mut rng);
    assert!(matches!(r, Err(Error::Contract(_))));
}
