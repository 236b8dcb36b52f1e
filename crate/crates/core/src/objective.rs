//! Exact objectives with closed-form derivatives.

use crate::hard::components::{lambda3, lambda_third_sup};
use crate::linalg::{dot, norm_sq, SymMatrix, Tridiagonal};
use crate::scalar::Real;

/// A twice-differentiable function with exact value, gradient and Hessian.
pub trait Objective<T: Real>: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[T]) -> T;
    fn gradient(&self, x: &[T]) -> Vec<T>;
    fn hessian(&self, x: &[T]) -> SymMatrix<T>;

    fn hvp(&self, x: &[T], v: &[T]) -> Vec<T> {
        match self.tridiagonal_hessian(x) {
            Some(t) => t.mul_vec(v),
            None => self.hessian(x).mul_vec(v),
        }
    }

    /// Banded Hessian for objectives that have one.
    fn tridiagonal_hessian(&self, _x: &[T]) -> Option<Tridiagonal<T>> {
        None
    }

    fn lambda_min(&self, x: &[T]) -> T {
        match self.tridiagonal_hessian(x) {
            Some(t) => t.lambda_min(),
            None => self.hessian(x).lambda_min(),
        }
    }

    fn name(&self) -> String;
}

/// `½ xᵀA x − bᵀx`.
#[derive(Clone, Debug)]
pub struct Quadratic<T> {
    pub a: SymMatrix<T>,
    pub b: Vec<T>,
}

impl<T: Real> Quadratic<T> {
    pub fn new(a: SymMatrix<T>, b: Vec<T>) -> Self {
        assert_eq!(a.dim(), b.len());
        Self { a, b }
    }

    /// `½‖x‖²`-style isotropic quadratic `(c/2)‖x‖²`.
    pub fn isotropic(d: usize, c: T) -> Self {
        let mut a = SymMatrix::identity(d);
        a.scale(c);
        Self::new(a, vec![T::zero(); d])
    }
}

impl<T: Real> Objective<T> for Quadratic<T> {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn value(&self, x: &[T]) -> T {
        T::lit(0.5) * self.a.quad_form(x) - dot(&self.b, x)
    }
    fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut g = self.a.mul_vec(x);
        for (gi, &bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        g
    }
    fn hessian(&self, _x: &[T]) -> SymMatrix<T> {
        self.a.clone()
    }
    fn hvp(&self, _x: &[T], v: &[T]) -> Vec<T> {
        self.a.mul_vec(v)
    }
    fn name(&self) -> String {
        "quadratic".into()
    }
}

/// Separable non-convex sum `α Σ Λ(β(x_i − c_i))` with `Λ(t) = 8(exp(−t²/2) − 1)`.
/// Its infimum `−8αd` is approached at infinity; `x = c` is the only finite
/// critical point (a maximum).
#[derive(Clone, Debug)]
pub struct LambdaSum<T> {
    pub centers: Vec<T>,
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> LambdaSum<T> {
    pub fn new(centers: Vec<T>) -> Self {
        Self { centers, alpha: T::one(), beta: T::one() }
    }

    pub fn scaled(centers: Vec<T>, alpha: T, beta: T) -> Self {
        Self { centers, alpha, beta }
    }

    /// `F(0) − inf F`.
    pub fn gap_at_origin(&self) -> T {
        self.alpha * self.centers.iter().map(|&c| lambda3(-self.beta * c)[0] + T::lit(8.0)).sum::<T>()
    }

    /// `8αβ²`.
    pub fn gradient_lipschitz(&self) -> T {
        T::lit(8.0) * self.alpha * self.beta * self.beta
    }

    /// The Hessian is diagonal, so its operator-norm Lipschitz constant is
    /// `αβ³` times the supremum of the third derivative of `Λ`.
    pub fn hessian_lipschitz(&self) -> T {
        T::lit(lambda_third_sup()) * self.alpha * self.beta.powi(3)
    }

    /// Order-`k` derivative of each summand.
    fn parts(&self, x: &[T], k: usize) -> Vec<T> {
        let scale = self.alpha * self.beta.powi(k as i32);
        x.iter().zip(&self.centers).map(|(&xi, &c)| scale * lambda3(self.beta * (xi - c))[k]).collect()
    }
}

impl<T: Real> Objective<T> for LambdaSum<T> {
    fn dim(&self) -> usize {
        self.centers.len()
    }
    fn value(&self, x: &[T]) -> T {
        self.parts(x, 0).into_iter().sum()
    }
    fn gradient(&self, x: &[T]) -> Vec<T> {
        self.parts(x, 1)
    }
    fn hessian(&self, x: &[T]) -> SymMatrix<T> {
        SymMatrix::from_diag(&self.parts(x, 2))
    }
    fn hvp(&self, x: &[T], v: &[T]) -> Vec<T> {
        self.parts(x, 2).iter().zip(v).map(|(&h, &vi)| h * vi).collect()
    }
    fn tridiagonal_hessian(&self, x: &[T]) -> Option<Tridiagonal<T>> {
        let d = self.dim();
        Some(Tridiagonal { diag: self.parts(x, 2), off: vec![T::zero(); d.saturating_sub(1)] })
    }
    fn lambda_min(&self, x: &[T]) -> T {
        self.parts(x, 2).into_iter().fold(T::infinity(), T::min)
    }
    fn name(&self) -> String {
        "lambda_sum".into()
    }
}

/// One summand of a finite-sum objective.
#[derive(Clone, Debug)]
pub enum Component<T> {
    /// `½ xᵀA x − bᵀx`.
    Quadratic { a: SymMatrix<T>, b: Vec<T> },
    /// `log(1 + exp(−y aᵀx)) + (reg/2)‖x‖²` with label `y = ±1`.
    Logistic { a: Vec<T>, y: T, reg: T },
}

fn sigmoid<T: Real>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

fn softplus<T: Real>(t: T) -> T {
    if t > T::zero() {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

impl<T: Real> Component<T> {
    pub fn value(&self, x: &[T]) -> T {
        match self {
            Component::Quadratic { a, b } => T::lit(0.5) * a.quad_form(x) - dot(b, x),
            Component::Logistic { a, y, reg } => {
                softplus(-*y * dot(a, x)) + T::lit(0.5) * *reg * norm_sq(x)
            }
        }
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        match self {
            Component::Quadratic { a, b } => {
                let mut g = a.mul_vec(x);
                for (gi, &bi) in g.iter_mut().zip(b) {
                    *gi -= bi;
                }
                g
            }
            Component::Logistic { a, y, reg } => {
                let m = *y * dot(a, x);
                let c = -*y * sigmoid(-m);
                a.iter().zip(x).map(|(&ai, &xi)| c * ai + *reg * xi).collect()
            }
        }
    }

    pub fn hessian(&self, x: &[T]) -> SymMatrix<T> {
        match self {
            Component::Quadratic { a, .. } => a.clone(),
            Component::Logistic { a, y, reg } => {
                let s = sigmoid(*y * dot(a, x));
                let mut h = SymMatrix::identity(a.len());
                h.scale(*reg);
                h.add_rank_one(s * (T::one() - s), a);
                h
            }
        }
    }

    pub fn hvp(&self, x: &[T], v: &[T]) -> Vec<T> {
        match self {
            Component::Quadratic { a, .. } => a.mul_vec(v),
            Component::Logistic { a, y, reg } => {
                let s = sigmoid(*y * dot(a, x));
                let c = s * (T::one() - s) * dot(a, v);
                a.iter().zip(v).map(|(&ai, &vi)| c * ai + *reg * vi).collect()
            }
        }
    }
}

/// Empirical-risk objective `(1/N) Σ_j f_j(x)`.
#[derive(Clone, Debug)]
pub struct FiniteSum<T> {
    dim: usize,
    pub components: Vec<Component<T>>,
}

impl<T: Real> FiniteSum<T> {
    pub fn new(dim: usize, components: Vec<Component<T>>) -> Self {
        assert!(!components.is_empty(), "finite sum needs at least one component");
        Self { dim, components }
    }

    fn n(&self) -> T {
        T::count(self.components.len())
    }

    /// Bound on `sup_x E‖∇²f_z(x) − ∇²F(x)‖²_op` for uniform `z`.
    ///
    /// For pure quadratics the value is exact. Logistic curvature terms are
    /// PSD with norm at most `‖a‖²/4`, so their deviation from the mean is
    /// bounded by the largest such norm.
    pub fn hessian_variance_bound(&self) -> T {
        let all_quadratic = self.components.iter().all(|c| matches!(c, Component::Quadratic { .. }));
        if all_quadratic {
            let x = vec![T::zero(); self.dim];
            let mean = self.hessian(&x);
            let acc: T = self
                .components
                .iter()
                .map(|c| {
                    let n = c.hessian(&x).sub(&mean).op_norm();
                    n * n
                })
                .sum();
            acc / self.n()
        } else {
            let mut quad_dev = T::zero();
            let mut curv = T::zero();
            let x = vec![T::zero(); self.dim];
            let quad_mean = {
                let mut m = SymMatrix::zeros(self.dim);
                for c in &self.components {
                    if let Component::Quadratic { a, .. } = c {
                        m.add_scaled(T::one(), a);
                    }
                }
                m.scale(T::one() / self.n());
                m
            };
            for c in &self.components {
                match c {
                    Component::Quadratic { .. } => {
                        quad_dev = quad_dev.max(c.hessian(&x).sub(&quad_mean).op_norm())
                    }
                    Component::Logistic { a, .. } => curv = curv.max(norm_sq(a) / T::lit(4.0)),
                }
            }
            let b = quad_dev + curv;
            b * b
        }
    }
}

impl<T: Real> Objective<T> for FiniteSum<T> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[T]) -> T {
        self.components.iter().map(|c| c.value(x)).sum::<T>() / self.n()
    }
    fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); self.dim];
        for c in &self.components {
            crate::linalg::axpy(T::one(), &c.gradient(x), &mut g);
        }
        let inv = T::one() / self.n();
        g.iter_mut().for_each(|v| *v *= inv);
        g
    }
    fn hessian(&self, x: &[T]) -> SymMatrix<T> {
        let mut h = SymMatrix::zeros(self.dim);
        for c in &self.components {
            h.add_scaled(T::one(), &c.hessian(x));
        }
        h.scale(T::one() / self.n());
        h
    }
    fn name(&self) -> String {
        "finite_sum".into()
    }
}
