//! Chain functions `F̄_T` (gradient chain) and `G_T` (curvature chain),
//! scaled as `α·f(βx)`, with closed-form tridiagonal derivatives.
//!
//! Both are sums over `i = 1..T` of `Ψ(−y_{i−1})u(−y_i) + s·Ψ(y_{i−1})u(y_i)`
//! with `y_0 = 1`: `u = Φ, s = −1` for `F̄_T` and `u = Λ, s = +1` for `G_T`.

use super::components::{lambda3, phi3, psi3};
use crate::linalg::{SymMatrix, Tridiagonal};
use crate::objective::Objective;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    /// `F̄_T`: large gradients until the chain is traversed.
    EpsChain,
    /// `G_T`: negative curvature until the chain is traversed.
    GammaChain,
}

impl ChainKind {
    /// Bound on `f(0) − inf f` per link.
    pub fn gap_per_link(self) -> f64 {
        match self {
            ChainKind::EpsChain => 12.0,
            ChainKind::GammaChain => 40.0,
        }
    }

    fn sign(self) -> f64 {
        match self {
            ChainKind::EpsChain => -1.0,
            ChainKind::GammaChain => 1.0,
        }
    }

    fn outer<T: Real>(self, x: T) -> [T; 3] {
        match self {
            ChainKind::EpsChain => phi3(x),
            ChainKind::GammaChain => lambda3(x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainFunction<T> {
    pub kind: ChainKind,
    /// Chain length, equal to the dimension.
    pub t: usize,
    pub alpha: T,
    pub beta: T,
}

/// Value, gradient and tridiagonal Hessian at one point.
#[derive(Clone, Debug)]
pub struct ChainEval<T> {
    pub value: T,
    pub gradient: Vec<T>,
    pub hessian: Tridiagonal<T>,
}

/// Partial derivatives of one link `(a, b) ↦ Ψ(−a)u(−b) + sΨ(a)u(b)`.
struct Link<T> {
    v: T,
    da: T,
    db: T,
    daa: T,
    dbb: T,
    dab: T,
}

impl<T: Real> ChainFunction<T> {
    pub fn unscaled(kind: ChainKind, t: usize) -> Self {
        Self { kind, t, alpha: T::one(), beta: T::one() }
    }

    pub fn scaled(kind: ChainKind, t: usize, alpha: T, beta: T) -> Self {
        Self { kind, t, alpha, beta }
    }

    /// Bound on `F(0) − inf F` for the scaled function.
    pub fn gap_bound(&self) -> T {
        self.alpha * T::lit(self.kind.gap_per_link()) * T::count(self.t)
    }

    fn link(&self, a: T, b: T) -> Link<T> {
        let s = T::lit(self.kind.sign());
        let pm = psi3(-a);
        let pp = psi3(a);
        let um = self.kind.outer(-b);
        let up = self.kind.outer(b);
        Link {
            v: pm[0] * um[0] + s * pp[0] * up[0],
            da: -pm[1] * um[0] + s * pp[1] * up[0],
            db: -pm[0] * um[1] + s * pp[0] * up[1],
            daa: pm[2] * um[0] + s * pp[2] * up[0],
            dbb: pm[0] * um[2] + s * pp[0] * up[2],
            dab: pm[1] * um[1] + s * pp[1] * up[1],
        }
    }

    /// Unscaled evaluation at `y`.
    pub fn eval_unscaled(&self, y: &[T]) -> ChainEval<T> {
        assert_eq!(y.len(), self.t, "chain dimension mismatch");
        let n = self.t;
        let mut value = T::zero();
        let mut grad = vec![T::zero(); n];
        let mut diag = vec![T::zero(); n];
        let mut off = vec![T::zero(); n.saturating_sub(1)];
        for i in 0..n {
            let a = if i == 0 { T::one() } else { y[i - 1] };
            let l = self.link(a, y[i]);
            value += l.v;
            grad[i] += l.db;
            diag[i] += l.dbb;
            if i > 0 {
                grad[i - 1] += l.da;
                diag[i - 1] += l.daa;
                off[i - 1] += l.dab;
            }
        }
        ChainEval { value, gradient: grad, hessian: Tridiagonal { diag, off } }
    }

    /// Scaled evaluation `α f(βx)` with derivative factors `αβ`, `αβ²`.
    pub fn eval(&self, x: &[T]) -> ChainEval<T> {
        let y: Vec<T> = x.iter().map(|&v| self.beta * v).collect();
        let mut e = self.eval_unscaled(&y);
        let g = self.alpha * self.beta;
        let h = g * self.beta;
        e.value *= self.alpha;
        e.gradient.iter_mut().for_each(|v| *v *= g);
        e.hessian.diag.iter_mut().for_each(|v| *v *= h);
        e.hessian.off.iter_mut().for_each(|v| *v *= h);
        e
    }
}

impl<T: Real> Objective<T> for ChainFunction<T> {
    fn dim(&self) -> usize {
        self.t
    }
    fn value(&self, x: &[T]) -> T {
        self.eval(x).value
    }
    fn gradient(&self, x: &[T]) -> Vec<T> {
        self.eval(x).gradient
    }
    fn hessian(&self, x: &[T]) -> SymMatrix<T> {
        self.eval(x).hessian.to_dense()
    }
    fn hvp(&self, x: &[T], v: &[T]) -> Vec<T> {
        self.eval(x).hessian.mul_vec(v)
    }
    fn tridiagonal_hessian(&self, x: &[T]) -> Option<Tridiagonal<T>> {
        Some(self.eval(x).hessian)
    }
    fn name(&self) -> String {
        match self.kind {
            ChainKind::EpsChain => "eps_chain".into(),
            ChainKind::GammaChain => "gamma_chain".into(),
        }
    }
}

/// `max{i ≥ 0 : |x_i| > α}` with the convention `x_0 = 1` (1-based indices).
pub fn prog<T: Real>(x: &[T], alpha: T) -> usize {
    x.iter().rposition(|v| v.abs() > alpha).map_or(0, |i| i + 1)
}
