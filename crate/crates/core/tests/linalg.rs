use hvpopt::linalg::{dot, norm, SymMatrix, Tridiagonal};
use proptest::prelude::*;

/// Cyclic Jacobi rotations; slow but independent of the library solver.
#[allow(clippy::needless_range_loop)]
fn jacobi_eigenvalues(m: &SymMatrix<f64>) -> Vec<f64> {
    let n = m.dim();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn sym(n: usize, data: &[f64]) -> SymMatrix<f64> {
    SymMatrix::from_fn(n, |i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        data[a * n + b]
    })
}

fn sym_strategy() -> impl Strategy<Value = SymMatrix<f64>> {
    (1usize..7).prop_flat_map(|n| prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |d| sym(n, &d)))
}

#[test]
fn diagonal_eigenvalues_sorted() {
    let m = SymMatrix::from_diag(&[3.0, -1.0, 2.0]);
    assert_eq!(m.eigenvalues(), vec![-1.0, 2.0, 3.0]);
    assert_eq!(m.lambda_min(), -1.0);
    assert_eq!(m.op_norm(), 3.0);
}

#[test]
fn rank_one_update() {
    let mut m = SymMatrix::<f64>::zeros(2);
    m.add_rank_one(2.0, &[1.0, 1.0]);
    assert_eq!(m.get(0, 1), 2.0);
    assert_eq!(m.quad_form(&[1.0, -1.0]), 0.0);
}

#[test]
fn generic_over_f32() {
    let m = SymMatrix::<f32>::from_diag(&[1.0, -2.0]);
    assert_eq!(m.lambda_min(), -2.0f32);
}

proptest! {
    #[test]
    fn eigenvalues_match_jacobi(m in sym_strategy()) {
        let ours = m.eigenvalues();
        let oracle = jacobi_eigenvalues(&m);
        for (a, b) in ours.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{ours:?} vs {oracle:?}");
        }
    }

    #[test]
    fn eigenpairs_have_small_residual(m in sym_strategy()) {
        let e = m.eigen();
        let n = m.dim();
        for k in 0..n {
            let v: Vec<f64> = (0..n).map(|i| e.vectors[k][i]).collect();
            prop_assert!((norm(&v) - 1.0).abs() < 1e-10);
            let mv = m.mul_vec(&v);
            let r: f64 = mv.iter().zip(&v).map(|(a, b)| (a - e.values[k] * b).powi(2)).sum::<f64>().sqrt();
            prop_assert!(r < 1e-9 * (1.0 + m.op_norm()));
            for j in 0..k {
                let w: Vec<f64> = (0..n).map(|i| e.vectors[j][i]).collect();
                prop_assert!(dot(&v, &w).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tridiagonal_agrees_with_dense(diag in prop::collection::vec(-3.0f64..3.0, 1..8), seed in 0u64..1000) {
        let n = diag.len();
        let off: Vec<f64> = (0..n.saturating_sub(1)).map(|i| ((seed + i as u64) % 7) as f64 - 3.0).collect();
        let t = Tridiagonal { diag, off };
        let dense = t.to_dense();
        let v: Vec<f64> = (0..n).map(|i| i as f64 - 1.5).collect();
        let a = t.mul_vec(&v);
        let b = dense.mul_vec(&v);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((t.lambda_min() - jacobi_eigenvalues(&dense)[0]).abs() < 1e-9);
    }
}
