use hvpopt::hard::{ChainFunction, ChainKind};
use hvpopt::linalg::{norm, sub, SymMatrix};
use hvpopt::objective::{Component, FiniteSum, LambdaSum, Objective, Quadratic};
use proptest::prelude::*;

/// Largest central-difference error of the gradient and of the Hessian columns.
fn fd_error(f: &dyn Objective<f64>, x: &[f64], h: f64) -> (f64, f64) {
    let g = f.gradient(x);
    let hess = f.hessian(x);
    let (mut eg, mut eh) = (0.0f64, 0.0f64);
    for j in 0..x.len() {
        let (mut p, mut m) = (x.to_vec(), x.to_vec());
        p[j] += h;
        m[j] -= h;
        let fd = (f.value(&p) - f.value(&m)) / (2.0 * h);
        eg = eg.max((fd - g[j]).abs() / (1.0 + g[j].abs()));
        let col: Vec<f64> = f.gradient(&p).iter().zip(f.gradient(&m)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        for (i, c) in col.iter().enumerate() {
            eh = eh.max((c - hess.get(i, j)).abs() / (1.0 + hess.get(i, j).abs()));
        }
    }
    (eg, eh)
}

fn objectives() -> Vec<Box<dyn Objective<f64>>> {
    let a = SymMatrix::from_fn(3, |i, j| if i == j { 2.0 + i as f64 } else { 0.3 });
    vec![
        Box::new(Quadratic::new(a, vec![1.0, -1.0, 0.5])),
        Box::new(LambdaSum::scaled(vec![0.2, -0.4, 1.0], 1.5, 0.8)),
        Box::new(FiniteSum::new(
            3,
            vec![
                Component::Logistic { a: vec![1.0, 0.5, -0.3], y: 1.0, reg: 0.1 },
                Component::Logistic { a: vec![-0.2, 0.9, 0.4], y: -1.0, reg: 0.1 },
            ],
        )),
        Box::new(ChainFunction::<f64>::scaled(ChainKind::EpsChain, 3, 1.2, 0.7)),
        Box::new(ChainFunction::<f64>::scaled(ChainKind::GammaChain, 3, 0.9, 1.1)),
    ]
}

proptest! {
    #[test]
    fn derivatives_match_finite_differences(x in prop::collection::vec(-2.0f64..2.0, 3)) {
        for f in objectives() {
            let (eg, eh) = fd_error(f.as_ref(), &x, 1e-5);
            prop_assert!(eg < 1e-6 && eh < 1e-5, "{}: {eg:e} {eh:e}", f.name());
        }
    }

    #[test]
    fn hvp_equals_hessian_times_vector(x in prop::collection::vec(-2.0f64..2.0, 3), v in prop::collection::vec(-1.0f64..1.0, 3)) {
        for f in objectives() {
            let a = f.hvp(&x, &v);
            let b = f.hessian(&x).mul_vec(&v);
            prop_assert!(norm(&sub(&a, &b)) < 1e-10, "{}", f.name());
        }
    }

    #[test]
    fn lambda_sum_constants_bound_sampled_quotients(x in prop::collection::vec(-3.0f64..3.0, 2), dx in prop::collection::vec(-0.5f64..0.5, 2)) {
        let f = LambdaSum::scaled(vec![0.1, -0.3], 2.0, 1.5);
        let y: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let d = norm(&dx);
        prop_assume!(d > 1e-6);
        let q1 = norm(&sub(&f.gradient(&x), &f.gradient(&y))) / d;
        let q2 = f.hessian(&x).sub(&f.hessian(&y)).op_norm() / d;
        prop_assert!(q1 <= f.gradient_lipschitz() * (1.0 + 1e-9));
        prop_assert!(q2 <= f.hessian_lipschitz() * (1.0 + 1e-9));
        prop_assert!(f.value(&[0.0; 2]) - f.value(&x) <= f.gap_at_origin() + 1e-12);
    }
}

#[test]
fn isotropic_quadratic() {
    let q = Quadratic::isotropic(3, 2.0);
    assert_eq!(q.value(&[1.0, 0.0, 1.0]), 2.0);
    assert_eq!(q.gradient(&[1.0, 2.0, 3.0]), vec![2.0, 4.0, 6.0]);
}
