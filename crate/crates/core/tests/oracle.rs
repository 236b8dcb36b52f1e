use hvpopt::linalg::{norm, sub, SymMatrix};
use hvpopt::multipoint::{estimate_mss_ratio, finite_diff_hvp, verify_mss_equivalence, ErmOracle, RadialSignOracle};
use hvpopt::objective::{Component, FiniteSum, Objective, Quadratic};
use hvpopt::oracle::{MultiPointOracle, NoiseParams, Oracle, ProblemInstance, QueryLedger, RegularityParams};
use hvpopt::{Error, Result};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn half_norm_sq(d: usize, noise: NoiseParams<f64>) -> ProblemInstance<f64> {
    let reg = RegularityParams::new(1.0, 1.0, 1.0).unwrap();
    ProblemInstance::new(Arc::new(Quadratic::isotropic(d, 1.0)), reg, noise).unwrap()
}

#[test]
fn zero_noise_channels_are_exact() {
    let inst = half_norm_sq(3, NoiseParams::zero());
    let mut o = inst.oracle(7);
    let x = [1.0, -2.0, 0.5];
    assert_eq!(o.grad(&x).unwrap(), x.to_vec());
    assert_eq!(o.hvp(&x, &[0.0, 1.0, 0.0]).unwrap(), vec![0.0, 1.0, 0.0]);
    assert_eq!(o.hess(&x).unwrap(), SymMatrix::identity(3));
}

#[test]
fn gradient_noise_at_stationary_point_has_norm_sigma1() {
    let inst = half_norm_sq(4, NoiseParams::new(1.0, 0.0));
    let mut o = inst.oracle(3);
    for _ in 0..100 {
        let g = o.grad(&[0.0; 4]).unwrap();
        assert!((norm(&g) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_direction_hvp_is_zero_and_counted() {
    let inst = half_norm_sq(3, NoiseParams::new(0.5, 0.5));
    let mut o = inst.oracle(1);
    assert_eq!(o.hvp(&[1.0, 1.0, 1.0], &[0.0; 3]).unwrap(), vec![0.0; 3]);
    assert_eq!(o.ledger().hvp_queries, 1);
}

#[test]
fn non_finite_point_is_rejected() {
    let inst = half_norm_sq(2, NoiseParams::zero());
    let mut o = inst.oracle(1);
    assert!(matches!(o.grad(&[f64::NAN, 0.0]), Err(Error::InvalidInput(_))));
}

#[test]
fn hessian_noise_draws_have_operator_norm_sigma2() {
    let inst = half_norm_sq(5, NoiseParams::new(0.0, 0.7));
    let mut o = inst.oracle(11);
    for _ in 0..50 {
        let h = o.hess(&[0.0; 5]).unwrap();
        assert!(h.is_symmetric());
        assert!((h.sub(&SymMatrix::identity(5)).op_norm() - 0.7).abs() < 1e-10);
    }
}

#[test]
fn same_seed_same_answers() {
    let inst = half_norm_sq(3, NoiseParams::new(1.0, 1.0));
    let (mut a, mut b) = (inst.oracle(5), inst.oracle(5));
    for k in 0..20 {
        let x = [k as f64, 1.0, -1.0];
        assert_eq!(a.grad(&x).unwrap(), b.grad(&x).unwrap());
        assert_eq!(a.hvp(&x, &[1.0, 0.0, 0.0]).unwrap(), b.hvp(&x, &[1.0, 0.0, 0.0]).unwrap());
    }
}

proptest! {
    #[test]
    fn ledger_counts_every_call(calls in prop::collection::vec(0u8..4, 0..60)) {
        let inst = half_norm_sq(2, NoiseParams::new(0.3, 0.3));
        let mut o = inst.oracle(9);
        let mut want = QueryLedger::default();
        for c in &calls {
            let x = [0.5, -0.5];
            match c {
                0 => { o.grad(&x).unwrap(); want.grad_queries += 1; }
                1 => { o.hvp(&x, &[1.0, 0.0]).unwrap(); want.hvp_queries += 1; }
                2 => { o.hess(&x).unwrap(); want.hess_queries += 1; }
                _ => { o.value(&x).unwrap(); want.value_queries += 1; }
            }
        }
        prop_assert_eq!(o.ledger(), want);
        prop_assert_eq!(o.ledger().total(), calls.len() as u64);
        prop_assert_eq!(o.substreams_consumed(), calls.len() as u64);
    }
}

/// Noiseless oracle for `x³/6` in one dimension.
struct HalfCube {
    ledger: QueryLedger,
}

impl Oracle<f64> for HalfCube {
    fn dim(&self) -> usize {
        1
    }
    fn grad(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.ledger.grad_queries += 1;
        Ok(vec![x[0] * x[0] / 2.0])
    }
    fn hvp(&mut self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.ledger.hvp_queries += 1;
        Ok(vec![x[0] * v[0]])
    }
    fn hess(&mut self, x: &[f64]) -> Result<SymMatrix<f64>> {
        self.ledger.hess_queries += 1;
        Ok(SymMatrix::from_diag(&[x[0]]))
    }
    fn ledger(&self) -> QueryLedger {
        self.ledger
    }
    fn hessian_noise_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl MultiPointOracle<f64> for HalfCube {
    fn max_points(&self) -> usize {
        2
    }
    fn grad_multi(&mut self, xs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        self.ledger.grad_queries += 1;
        Ok(xs.iter().map(|x| vec![x[0] * x[0] / 2.0]).collect())
    }
    fn jacobian_consistent(&self) -> bool {
        true
    }
    fn exact_gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] * x[0] / 2.0]
    }
    fn hessian_variance(&self) -> f64 {
        0.0
    }
}

#[test]
fn finite_difference_hvp_bias_on_cubic() {
    let mut o = HalfCube { ledger: QueryLedger::default() };
    let v = finite_diff_hvp(&mut o, &[0.0], &[1.0], 0.2).unwrap();
    assert!((v[0] - 0.1).abs() < 1e-15);
    assert_eq!(o.ledger().grad_queries, 1);
}

fn spread_quadratics() -> Arc<FiniteSum<f64>> {
    let comps = vec![
        Component::Quadratic { a: SymMatrix::from_diag(&[1.5, 1.0]), b: vec![0.0, 1.0] },
        Component::Quadratic { a: SymMatrix::from_diag(&[0.5, 1.0]), b: vec![1.0, 0.0] },
    ];
    Arc::new(FiniteSum::new(2, comps))
}

#[test]
fn finite_difference_hvp_exact_on_quadratic_erm() {
    let f = spread_quadratics();
    let mut o = ErmOracle::new(f.clone(), 4);
    let x = [0.3, -0.7];
    let u = [0.6, 0.8];
    let v = finite_diff_hvp(&mut o, &x, &u, 0.5).unwrap();
    // The draw picked one component; its Hessian times u is one of two vectors.
    let cands = [[0.9, 0.8], [0.3, 0.8]];
    assert!(cands.iter().any(|c| norm(&sub(&v, c)) < 1e-12), "{v:?}");
    assert_eq!(o.substreams_consumed(), 1);
}

#[test]
fn quadratic_erm_is_mean_squared_smooth() {
    let f = spread_quadratics();
    let bound = f.hessian_variance_bound();
    let mut o = ErmOracle::new(f, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = verify_mss_equivalence(&mut o, 6, 2_000, 0.1, &mut rng).unwrap();
    assert!(r.is_mss, "{r:?}");
    assert!(r.sup_ratio <= bound * 1.1);
}

#[test]
fn radial_sign_noise_is_not_mean_squared_smooth() {
    let f: Arc<dyn Objective<f64>> = Arc::new(Quadratic::isotropic(2, 1.0));
    let mut o = RadialSignOracle::new(f, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    assert!(matches!(verify_mss_equivalence(&mut o, 6, 200, 0.1, &mut rng), Err(Error::Contract(_))));
    let r = estimate_mss_ratio(&mut o, 8, 200, 0.1, &mut rng).unwrap();
    assert!(!r.is_mss);
    assert!(r.sup_ratio > 1e3);
}
