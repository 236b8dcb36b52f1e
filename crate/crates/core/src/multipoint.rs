//! Two-point oracles: finite-difference Hessian-vector products and the
//! mean-squared-smoothness check for finite-sum oracles.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{norm, norm_sq, sub, SymMatrix};
use crate::objective::{FiniteSum, Objective};
use crate::oracle::{check_point, MultiPointOracle, Oracle, QueryLedger};
use crate::rng::{gaussian_vector, uniform_index, SeedStream};
use crate::scalar::Real;
use rand::Rng;
use std::sync::Arc;

/// `(1/δ)[∇̂F(x + δu, z) − ∇̂F(x, z)]` with one shared draw `z`.
pub fn finite_diff_hvp<T: Real, O: MultiPointOracle<T>>(
    oracle: &mut O,
    x: &[T],
    u: &[T],
    delta: T,
) -> Result<Vec<T>> {
    if !(delta > T::zero() && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("delta must be > 0, got {delta}")));
    }
    if oracle.max_points() < 2 {
        return Err(Error::Contract("finite differencing needs an n-point oracle with n >= 2".into()));
    }
    check_dim(oracle.dim(), u.len())?;
    if (norm(u) - T::one()).abs() > T::lit(1e-6) {
        return Err(Error::InvalidInput("direction must have unit norm".into()));
    }
    let shifted: Vec<T> = x.iter().zip(u).map(|(&a, &b)| a + delta * b).collect();
    let g = oracle.grad_multi(&[&shifted, x])?;
    Ok(g[0].iter().zip(&g[1]).map(|(&a, &b)| (a - b) / delta).collect())
}

/// Finite-sum oracle: draw `z` is a uniform component index and every channel
/// answers with that component's exact derivative.
pub struct ErmOracle<T: Real> {
    problem: Arc<FiniteSum<T>>,
    streams: SeedStream,
    ledger: QueryLedger,
    substreams: u64,
}

impl<T: Real> ErmOracle<T> {
    pub fn new(problem: Arc<FiniteSum<T>>, seed: u64) -> Self {
        Self { problem, streams: SeedStream::new(seed), ledger: QueryLedger::default(), substreams: 0 }
    }

    fn draw(&mut self) -> usize {
        let mut rng = self.streams.substream(self.substreams);
        self.substreams += 1;
        uniform_index(&mut rng, self.problem.components.len())
    }

    pub fn substreams_consumed(&self) -> u64 {
        self.substreams
    }
}

impl<T: Real> Oracle<T> for ErmOracle<T> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }
    fn grad(&mut self, x: &[T]) -> Result<Vec<T>> {
        check_point(self.dim(), x)?;
        let j = self.draw();
        self.ledger.grad_queries += 1;
        Ok(self.problem.components[j].gradient(x))
    }
    fn hvp(&mut self, x: &[T], v: &[T]) -> Result<Vec<T>> {
        check_point(self.dim(), x)?;
        check_dim(self.dim(), v.len())?;
        let j = self.draw();
        self.ledger.hvp_queries += 1;
        Ok(self.problem.components[j].hvp(x, v))
    }
    fn hess(&mut self, x: &[T]) -> Result<SymMatrix<T>> {
        check_point(self.dim(), x)?;
        let j = self.draw();
        self.ledger.hess_queries += 1;
        Ok(self.problem.components[j].hessian(x))
    }
    fn ledger(&self) -> QueryLedger {
        self.ledger
    }
    fn hessian_noise_bound(&self) -> Option<T> {
        None
    }
}

impl<T: Real> MultiPointOracle<T> for ErmOracle<T> {
    fn max_points(&self) -> usize {
        usize::MAX
    }
    fn grad_multi(&mut self, xs: &[&[T]]) -> Result<Vec<Vec<T>>> {
        for x in xs {
            check_point(self.dim(), x)?;
        }
        let j = self.draw();
        self.ledger.grad_queries += 1;
        Ok(xs.iter().map(|x| self.problem.components[j].gradient(x)).collect())
    }
    fn jacobian_consistent(&self) -> bool {
        true
    }
    fn exact_gradient(&self, x: &[T]) -> Vec<T> {
        self.problem.gradient(x)
    }
    fn hessian_variance(&self) -> T {
        self.problem.hessian_variance_bound()
    }
}

/// Oracle whose gradient noise is `z · x/‖x‖` with `z = ±1` while the Hessian
/// is exact. Its Hessian channel has zero variance yet the gradient is not
/// mean-squared smooth.
pub struct RadialSignOracle<T: Real> {
    objective: Arc<dyn Objective<T>>,
    streams: SeedStream,
    ledger: QueryLedger,
    substreams: u64,
}

impl<T: Real> RadialSignOracle<T> {
    pub fn new(objective: Arc<dyn Objective<T>>, seed: u64) -> Self {
        Self { objective, streams: SeedStream::new(seed), ledger: QueryLedger::default(), substreams: 0 }
    }

    fn draw(&mut self) -> T {
        let mut rng = self.streams.substream(self.substreams);
        self.substreams += 1;
        crate::rng::rademacher(&mut rng)
    }

    fn noisy(&self, x: &[T], z: T) -> Vec<T> {
        let mut g = self.objective.gradient(x);
        let n = norm(x);
        if n > T::zero() {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi += z * xi / n;
            }
        }
        g
    }
}

impl<T: Real> Oracle<T> for RadialSignOracle<T> {
    fn dim(&self) -> usize {
        self.objective.dim()
    }
    fn grad(&mut self, x: &[T]) -> Result<Vec<T>> {
        check_point(self.dim(), x)?;
        let z = self.draw();
        self.ledger.grad_queries += 1;
        Ok(self.noisy(x, z))
    }
    fn hvp(&mut self, x: &[T], v: &[T]) -> Result<Vec<T>> {
        check_point(self.dim(), x)?;
        self.draw();
        self.ledger.hvp_queries += 1;
        Ok(self.objective.hvp(x, v))
    }
    fn hess(&mut self, x: &[T]) -> Result<SymMatrix<T>> {
        check_point(self.dim(), x)?;
        self.draw();
        self.ledger.hess_queries += 1;
        Ok(self.objective.hessian(x))
    }
    fn ledger(&self) -> QueryLedger {
        self.ledger
    }
    fn hessian_noise_bound(&self) -> Option<T> {
        Some(T::zero())
    }
}

impl<T: Real> MultiPointOracle<T> for RadialSignOracle<T> {
    fn max_points(&self) -> usize {
        usize::MAX
    }
    fn grad_multi(&mut self, xs: &[&[T]]) -> Result<Vec<Vec<T>>> {
        for x in xs {
            check_point(self.dim(), x)?;
        }
        let z = self.draw();
        self.ledger.grad_queries += 1;
        Ok(xs.iter().map(|x| self.noisy(x, z)).collect())
    }
    fn jacobian_consistent(&self) -> bool {
        false
    }
    fn exact_gradient(&self, x: &[T]) -> Vec<T> {
        self.objective.gradient(x)
    }
    fn hessian_variance(&self) -> T {
        T::zero()
    }
}

/// Outcome of a mean-squared-smoothness probe.
#[derive(Clone, Debug)]
pub struct MssReport {
    /// Largest estimated quotient `E‖Δ̂ − Δ‖² / ‖x − y‖²` over probed pairs.
    pub sup_ratio: f64,
    /// Declared Hessian variance `σ₂²`.
    pub sigma2_sq: f64,
    /// Allowed relative Monte Carlo excess.
    pub tolerance: f64,
    /// Quotient per probed pair, with the pair distance.
    pub pairs: Vec<(f64, f64)>,
    /// `sup_ratio ≤ σ₂²·(1 + tolerance)`.
    pub is_mss: bool,
}

/// Monte Carlo estimate of the mean-squared-smoothness quotient with no
/// precondition on the oracle. Pairs straddle random centres and the origin at
/// geometrically shrinking distances so that non-smooth noise shows up.
pub fn estimate_mss_ratio<T: Real, O: MultiPointOracle<T>, R: Rng>(
    oracle: &mut O,
    pairs: usize,
    draws: usize,
    tolerance: f64,
    rng: &mut R,
) -> Result<MssReport> {
    if oracle.max_points() < 2 {
        return Err(Error::Contract("two-point queries unavailable".into()));
    }
    if pairs == 0 || draws == 0 {
        return Err(Error::InvalidInput("pairs and draws must be positive".into()));
    }
    let d = oracle.dim();
    let mut out = Vec::with_capacity(pairs);
    for p in 0..pairs {
        let dist = T::lit(10f64.powf(-(p as f64) * 4.0 / pairs.max(2).saturating_sub(1).max(1) as f64));
        let mut w: Vec<T> = gaussian_vector(rng, d);
        let wn = norm(&w);
        w.iter_mut().for_each(|v| *v /= wn);
        let centre: Vec<T> = if p % 2 == 0 { vec![T::zero(); d] } else { gaussian_vector(rng, d) };
        let half = dist / T::lit(2.0);
        let x: Vec<T> = centre.iter().zip(&w).map(|(&c, &wi)| c + half * wi).collect();
        let y: Vec<T> = centre.iter().zip(&w).map(|(&c, &wi)| c - half * wi).collect();
        let exact = sub(&oracle.exact_gradient(&x), &oracle.exact_gradient(&y));
        let mut acc = 0.0;
        for _ in 0..draws {
            let g = oracle.grad_multi(&[&x, &y])?;
            let diff = sub(&sub(&g[0], &g[1]), &exact);
            acc += norm_sq(&diff).f64();
        }
        let dxy = norm_sq(&sub(&x, &y)).f64();
        out.push((dxy.sqrt(), acc / draws as f64 / dxy));
    }
    let sup_ratio = out.iter().map(|p| p.1).fold(0.0, f64::max);
    let sigma2_sq = oracle.hessian_variance().f64();
    let is_mss = sup_ratio <= sigma2_sq * (1.0 + tolerance) + 1e-12;
    Ok(MssReport { sup_ratio, sigma2_sq, tolerance, pairs: out, is_mss })
}

/// Checks that a Jacobian-consistent oracle is mean-squared smooth with
/// constant at most its Hessian standard deviation. Oracles without the
/// Jacobian relation are rejected.
pub fn verify_mss_equivalence<T: Real, O: MultiPointOracle<T>, R: Rng>(
    oracle: &mut O,
    pairs: usize,
    draws: usize,
    tolerance: f64,
    rng: &mut R,
) -> Result<MssReport> {
    if !oracle.jacobian_consistent() {
        return Err(Error::Contract(
            "Hessian estimator is not the Jacobian of the gradient estimator".into(),
        ));
    }
    estimate_mss_ratio(oracle, pairs, draws, tolerance, rng)
}
