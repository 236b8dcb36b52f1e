//! Ball-constrained cubic-regularised model minimisation.
//!
//! Minimises `⟨g,s⟩ + ½⟨s,Hs⟩ + (M/6)‖s‖³` over `‖s‖ ≤ r`. In the eigenbasis
//! of `H` every KKT point is `s(θ) = −(H + θI)⁻¹g` with
//! `θ = (M/2)‖s‖ + μ`, so the problem reduces to the scalar equation
//! `‖s(θ)‖ = min(2θ/M, r)` solved by bisection in the shift above `−λ_min`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot, norm, SymEigen, SymMatrix};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct CubicModel<T: Real> {
    pub g: Vec<T>,
    pub h: SymMatrix<T>,
    /// Cubic penalty `M`.
    pub m: T,
    /// Trust radius.
    pub radius: T,
}

impl<T: Real> CubicModel<T> {
    pub fn value(&self, s: &[T]) -> T {
        let n = norm(s);
        dot(&self.g, s) + T::lit(0.5) * self.h.quad_form(s) + self.m / T::lit(6.0) * n * n * n
    }

    /// `‖g + Hs + (M/2)‖s‖s + μs‖`.
    pub fn kkt_residual(&self, s: &[T], mu: T) -> T {
        let mut r = self.h.mul_vec(s);
        axpy(T::one(), &self.g, &mut r);
        axpy(self.m / T::lit(2.0) * norm(s) + mu, s, &mut r);
        norm(&r)
    }
}

#[derive(Clone, Debug)]
pub struct CubicSolution<T> {
    pub step: Vec<T>,
    /// Ball multiplier `μ ≥ 0`.
    pub multiplier: T,
    /// `θ = (M/2)‖s‖ + μ`.
    pub theta: T,
    pub boundary: bool,
    pub hard_case: bool,
    pub kkt_residual: T,
    /// `kkt_residual ≤ tol·(‖g‖ + 1)`.
    pub converged: bool,
}

/// `θ ↦ ‖(H + θI)⁻¹g‖` in the shift variable `ζ = θ − θ_low`.
#[derive(Clone, Debug)]
pub struct Secular<T> {
    /// `λ_i + θ_low ≥ 0`, exactly zero on the bottom eigenvalue when it is non-positive.
    shifted: Vec<T>,
    coeffs: Vec<T>,
    theta_low: T,
}

impl<T: Real> Secular<T> {
    pub fn new(eig: &SymEigen<T>, g: &[T]) -> Self {
        let lmin = eig.values[0];
        let theta_low = (-lmin).max(T::zero());
        let shifted = eig
            .values
            .iter()
            .enumerate()
            .map(|(i, &l)| if i == 0 && lmin <= T::zero() { T::zero() } else { (l + theta_low).max(T::zero()) })
            .collect();
        Self { shifted, coeffs: eig.project(g), theta_low }
    }

    /// Left end of the domain, `max(0, −λ_min)`.
    pub fn theta_low(&self) -> T {
        self.theta_low
    }

    /// `‖s(θ_low + ζ)‖` for `ζ > 0`.
    pub fn norm_at_shift(&self, zeta: T) -> T {
        self.shifted
            .iter()
            .zip(&self.coeffs)
            .map(|(&l, &c)| {
                let q = c / (l + zeta);
                q * q
            })
            .sum::<T>()
            .sqrt()
    }

    /// `‖s(θ)‖`; non-increasing on `θ > θ_low`.
    pub fn norm(&self, theta: T) -> T {
        self.norm_at_shift(theta - self.theta_low)
    }
}

pub fn solve_cubic_tr<T: Real>(model: &CubicModel<T>, tol: T) -> Result<CubicSolution<T>> {
    let d = model.g.len();
    check_dim(model.h.dim(), d)?;
    if !model.h.is_symmetric() {
        return Err(Error::InvalidInput("Hessian estimate is not symmetric".into()));
    }
    if !(model.m > T::zero() && model.radius > T::zero() && tol > T::zero()) {
        return Err(Error::InvalidInput("M, radius and tol must be positive".into()));
    }
    let eig = model.h.eigen();
    let sec = Secular::new(&eig, &model.g);
    let two = T::lit(2.0);
    let m = model.m;
    let r = model.radius;
    let target = |theta: T| (two * theta / m).min(r);
    let gnorm = norm(&model.g);
    let theta_low = sec.theta_low;
    let lmin = eig.values[0];
    let lmax = *eig.values.last().unwrap();

    // Hard case: gradient (numerically) orthogonal to the bottom eigenspace
    // and the remaining components too short to reach the target norm.
    let spread = T::lit(1e-12) * T::one().max(lmin.abs()).max(lmax.abs());
    let bottom: Vec<usize> = (0..d).filter(|&i| eig.values[i] - lmin <= spread).collect();
    let g_bottom = bottom.iter().map(|&i| sec.coeffs[i] * sec.coeffs[i]).sum::<T>().sqrt();
    if lmin <= T::zero() && g_bottom <= T::lit(0.1) * tol * (gnorm + T::one()) {
        let mut rest = vec![T::zero(); d];
        for i in 0..d {
            if !bottom.contains(&i) {
                rest[i] = -sec.coeffs[i] / (eig.values[i] + theta_low);
            }
        }
        let rest_norm = norm(&rest);
        let nu = target(theta_low);
        if rest_norm <= nu {
            let extra = (nu * nu - rest_norm * rest_norm).max(T::zero()).sqrt();
            // Bottom-space direction: follow −g when it has any component there, else the first eigenvector with + sign.
            if g_bottom > T::zero() {
                for &i in &bottom {
                    rest[i] = -extra * sec.coeffs[i] / g_bottom;
                }
            } else {
                rest[bottom[0]] = extra;
            }
            let step = eig.expand(&rest);
            let boundary = two * theta_low / m > r;
            let mu = if boundary { theta_low - m * r / two } else { T::zero() };
            return Ok(finish(model, step, mu, theta_low, boundary, true, tol, gnorm));
        }
    }

    // h(ζ) = ‖s‖ − target(θ) is strictly decreasing; bracket its root.
    let h = |zeta: T| sec.norm_at_shift(zeta) - target(theta_low + zeta);
    let mut lo = T::zero();
    let mut hi = T::one().max(gnorm).max(lmax.abs());
    let mut guard = 0;
    while h(hi) > T::zero() {
        lo = hi;
        hi *= two;
        guard += 1;
        if guard > 2000 || !hi.is_finite() {
            return Err(Error::InvalidInput("cubic model could not be bracketed".into()));
        }
    }
    if lmin > T::zero() && h(T::zero()) <= T::zero() {
        // Only when g = 0 with positive-definite H: s = 0.
        hi = T::zero();
    } else {
        for _ in 0..4000 {
            let mid = lo + (hi - lo) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid) > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let zeta = if lo > T::zero() && h(lo).abs() < h(hi).abs() { lo } else { hi };
    let theta = theta_low + zeta;
    let coeffs: Vec<T> = sec
        .shifted
        .iter()
        .zip(&sec.coeffs)
        .map(|(&l, &c)| if c == T::zero() { T::zero() } else { -c / (l + zeta) })
        .collect();
    let step = eig.expand(&coeffs);
    let boundary = two * theta / m > r;
    let mu = if boundary { theta - m * r / two } else { T::zero() };
    Ok(finish(model, step, mu, theta, boundary, false, tol, gnorm))
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Real>(
    model: &CubicModel<T>,
    mut step: Vec<T>,
    mu: T,
    theta: T,
    boundary: bool,
    hard_case: bool,
    tol: T,
    gnorm: T,
) -> CubicSolution<T> {
    let n = norm(&step);
    if n > model.radius {
        let c = model.radius / n;
        step.iter_mut().for_each(|v| *v *= c);
    }
    let kkt = model.kkt_residual(&step, mu);
    CubicSolution {
        converged: kkt <= tol * (gnorm + T::one()),
        step,
        multiplier: mu,
        theta,
        boundary,
        hard_case,
        kkt_residual: kkt,
    }
}
