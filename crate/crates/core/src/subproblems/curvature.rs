//! Exact-eigenvector curvature direction and the random-sign curvature step.

use crate::linalg::{norm, SymMatrix};
use crate::rng::rademacher;
use crate::scalar::Real;
use rand::Rng;

/// Bottom eigenvector of `h` if `λ_min(h) ≤ −4γ` (inclusive), else `None`.
pub fn exact_curvature_direction<T: Real>(h: &SymMatrix<T>, gamma: T) -> Option<Vec<T>> {
    let eig = h.eigen();
    if eig.lambda_min() <= -T::lit(4.0) * gamma {
        let mut u = eig.vectors[0].clone();
        let n = norm(&u);
        u.iter_mut().for_each(|v| *v /= n);
        Some(u)
    } else {
        None
    }
}

/// `x + (γ/L₂)·r·u` with a Rademacher sign `r`.
pub fn curvature_step<T: Real, R: Rng + ?Sized>(x: &[T], u: &[T], gamma: T, l2: T, rng: &mut R) -> Vec<T> {
    let r: T = rademacher(rng);
    signed_curvature_step(x, u, gamma, l2, r)
}

/// Curvature step with a given sign.
pub fn signed_curvature_step<T: Real>(x: &[T], u: &[T], gamma: T, l2: T, sign: T) -> Vec<T> {
    let c = gamma / l2 * sign;
    x.iter().zip(u).map(|(&a, &b)| a + c * b).collect()
}
