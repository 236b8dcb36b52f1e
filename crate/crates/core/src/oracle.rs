//! Stochastic oracle model, noise constructions and query accounting.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{all_finite, dot, SymMatrix};
use crate::objective::Objective;
use crate::rng::{gaussian_vector, rademacher, unit_sphere, SeedStream};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Regularity of the objective: initial gap and Lipschitz constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityParams<T> {
    /// `F(0) − inf F`.
    pub delta: T,
    /// Gradient Lipschitz constant; `+∞` marks an unbounded class.
    pub l1: T,
    /// Hessian Lipschitz constant.
    pub l2: T,
}

impl<T: Real> RegularityParams<T> {
    pub fn new(delta: T, l1: T, l2: T) -> Result<Self> {
        let r = Self { delta, l1, l2 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= T::zero() && self.delta.is_finite()) {
            return Err(Error::Config(format!("delta must be finite and >= 0, got {}", self.delta)));
        }
        if !(self.l1 > T::zero()) {
            return Err(Error::Config(format!("l1 must be > 0 (or +inf), got {}", self.l1)));
        }
        if !(self.l2 > T::zero() && self.l2.is_finite()) {
            return Err(Error::Config(format!("l2 must be finite and > 0, got {}", self.l2)));
        }
        Ok(())
    }
}

/// Single- or multi-point query model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    SinglePoint,
    /// Up to `n` points evaluated under one shared draw.
    NPoint(usize),
}

/// Distribution of the additive gradient noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLaw {
    /// `σ₁ ξ u`: Rademacher sign times a uniform unit vector, norm exactly `σ₁`.
    #[default]
    Rademacher,
    /// `N(0, σ₁²/d · I)`.
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams<T> {
    pub sigma1: T,
    pub sigma2: T,
    /// Almost-sure operator-norm bound on the Hessian noise, if declared.
    pub sigma2_as: Option<T>,
    pub mode: QueryMode,
    pub law: NoiseLaw,
}

impl<T: Real> NoiseParams<T> {
    pub fn new(sigma1: T, sigma2: T) -> Self {
        Self { sigma1, sigma2, sigma2_as: None, mode: QueryMode::SinglePoint, law: NoiseLaw::Rademacher }
    }

    /// Declares `σ̄₂ = σ₂`, which the rank-one Hessian noise attains exactly.
    pub fn with_almost_sure_bound(mut self) -> Self {
        self.sigma2_as = Some(self.sigma2);
        self
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero()).with_almost_sure_bound()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma1 >= T::zero() && self.sigma1.is_finite()) {
            return Err(Error::Config(format!("sigma1 must be >= 0, got {}", self.sigma1)));
        }
        if !(self.sigma2 >= T::zero() && self.sigma2.is_finite()) {
            return Err(Error::Config(format!("sigma2 must be >= 0, got {}", self.sigma2)));
        }
        if let Some(s) = self.sigma2_as {
            // Every Hessian draw has operator norm exactly sigma2.
            if !(s >= self.sigma2) {
                return Err(Error::Config(format!(
                    "sigma2_as = {s} is below the realised Hessian noise norm sigma2 = {}",
                    self.sigma2
                )));
            }
        }
        if let QueryMode::NPoint(n) = self.mode {
            if n == 0 {
                return Err(Error::Config("n_point mode needs n >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Per-channel query counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub grad_queries: u64,
    pub hvp_queries: u64,
    pub hess_queries: u64,
    pub value_queries: u64,
}

impl QueryLedger {
    pub fn total(&self) -> u64 {
        self.grad_queries + self.hvp_queries + self.hess_queries + self.value_queries
    }

    /// Counter-wise difference `self − earlier`.
    pub fn since(&self, earlier: &QueryLedger) -> QueryLedger {
        QueryLedger {
            grad_queries: self.grad_queries - earlier.grad_queries,
            hvp_queries: self.hvp_queries - earlier.hvp_queries,
            hess_queries: self.hess_queries - earlier.hess_queries,
            value_queries: self.value_queries - earlier.value_queries,
        }
    }
}

/// Full answer tuple `(F̂, ∇̂F, ∇̂²F)`.
#[derive(Clone, Debug)]
pub struct OracleAnswer<T> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Option<SymMatrix<T>>,
}

/// An objective, its regularity constants and the noise model wrapping it.
#[derive(Clone)]
pub struct ProblemInstance<T: Real> {
    pub objective: Arc<dyn Objective<T>>,
    pub regularity: RegularityParams<T>,
    pub noise: NoiseParams<T>,
}

impl<T: Real> std::fmt::Debug for ProblemInstance<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("objective", &self.objective.name())
            .field("dim", &self.dim())
            .field("regularity", &self.regularity)
            .field("noise", &self.noise)
            .finish()
    }
}

impl<T: Real> ProblemInstance<T> {
    pub fn new(
        objective: Arc<dyn Objective<T>>,
        regularity: RegularityParams<T>,
        noise: NoiseParams<T>,
    ) -> Result<Self> {
        regularity.validate()?;
        noise.validate()?;
        if objective.dim() == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        Ok(Self { objective, regularity, noise })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    /// Oracle over this instance whose noise streams derive from `seed`.
    pub fn oracle(&self, seed: u64) -> NoisyOracle<'_, T> {
        NoisyOracle::new(self, seed)
    }
}

/// Source of stochastic derivative information with query accounting.
pub trait Oracle<T: Real> {
    fn dim(&self) -> usize;
    fn grad(&mut self, x: &[T]) -> Result<Vec<T>>;
    fn hvp(&mut self, x: &[T], v: &[T]) -> Result<Vec<T>>;
    fn hess(&mut self, x: &[T]) -> Result<SymMatrix<T>>;
    fn ledger(&self) -> QueryLedger;
    /// Almost-sure operator-norm bound on Hessian noise, when the oracle has one.
    fn hessian_noise_bound(&self) -> Option<T>;
}

/// Oracle that can evaluate several points under one shared draw.
pub trait MultiPointOracle<T: Real>: Oracle<T> {
    /// Largest number of points one query may carry.
    fn max_points(&self) -> usize;
    /// Stochastic gradients at every point in `xs` under one draw; one ledger unit.
    fn grad_multi(&mut self, xs: &[&[T]]) -> Result<Vec<Vec<T>>>;
    /// Whether the Hessian estimator is the Jacobian of the gradient estimator for the same draw.
    fn jacobian_consistent(&self) -> bool;
    fn exact_gradient(&self, x: &[T]) -> Vec<T>;
    /// Declared `σ₂²`, the Hessian-estimator variance bound.
    fn hessian_variance(&self) -> T;
}

pub(crate) fn check_point<T: Real>(d: usize, x: &[T]) -> Result<()> {
    check_dim(d, x.len())?;
    if !all_finite(x) {
        return Err(Error::InvalidInput("query point has non-finite entries".into()));
    }
    Ok(())
}

/// Oracle realising the additive noise model on a [`ProblemInstance`].
///
/// Gradient noise is `σ₁ ξ u` (or Gaussian), Hessian noise `σ₂ ξ' u'u'ᵀ`.
/// Call `k` draws its noise from sub-stream `k`.
pub struct NoisyOracle<'a, T: Real> {
    instance: &'a ProblemInstance<T>,
    streams: SeedStream,
    ledger: QueryLedger,
    substreams: u64,
}

impl<'a, T: Real> NoisyOracle<'a, T> {
    pub fn new(instance: &'a ProblemInstance<T>, seed: u64) -> Self {
        Self { instance, streams: SeedStream::new(seed), ledger: QueryLedger::default(), substreams: 0 }
    }

    pub fn instance(&self) -> &ProblemInstance<T> {
        self.instance
    }

    /// Number of noise sub-streams consumed so far.
    pub fn substreams_consumed(&self) -> u64 {
        self.substreams
    }

    fn next_stream(&mut self) -> rand_chacha::ChaCha8Rng {
        let rng = self.streams.substream(self.substreams);
        self.substreams += 1;
        rng
    }

    fn grad_noise(&self, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<T> {
        let d = self.dim();
        let s1 = self.instance.noise.sigma1;
        match self.instance.noise.law {
            NoiseLaw::Rademacher => {
                let xi: T = rademacher(rng);
                let u = unit_sphere::<T, _>(rng, d);
                u.into_iter().map(|v| s1 * xi * v).collect()
            }
            NoiseLaw::Gaussian => {
                let scale = s1 / T::count(d).sqrt();
                gaussian_vector::<T, _>(rng, d).into_iter().map(|v| scale * v).collect()
            }
        }
    }

    /// Returns `(σ₂ ξ, u)` describing the rank-one Hessian noise.
    fn hess_noise(&self, rng: &mut rand_chacha::ChaCha8Rng) -> (T, Vec<T>) {
        let xi: T = rademacher(rng);
        let u = unit_sphere::<T, _>(rng, self.dim());
        (self.instance.noise.sigma2 * xi, u)
    }

    /// Exact function value; counted in the value channel.
    pub fn value(&mut self, x: &[T]) -> Result<T> {
        check_point(self.dim(), x)?;
        self.substreams += 1;
        self.ledger.value_queries += 1;
        Ok(self.instance.objective.value(x))
    }

    /// Full answer tuple from one draw. Counted as a Hessian query when the
    /// Hessian is requested and as a gradient query otherwise.
    pub fn answer(&mut self, x: &[T], with_hessian: bool) -> Result<OracleAnswer<T>> {
        check_point(self.dim(), x)?;
        let mut rng = self.next_stream();
        let obj = &self.instance.objective;
        let mut grad = obj.gradient(x);
        for (g, n) in grad.iter_mut().zip(self.grad_noise(&mut rng)) {
            *g += n;
        }
        let hess = if with_hessian {
            let mut h = obj.hessian(x);
            let (a, u) = self.hess_noise(&mut rng);
            h.add_rank_one(a, &u);
            self.ledger.hess_queries += 1;
            Some(h)
        } else {
            self.ledger.grad_queries += 1;
            None
        };
        Ok(OracleAnswer { value: obj.value(x), grad, hess })
    }
}

impl<T: Real> Oracle<T> for NoisyOracle<'_, T> {
    fn dim(&self) -> usize {
        self.instance.dim()
    }

    fn grad(&mut self, x: &[T]) -> Result<Vec<T>> {
        check_point(self.dim(), x)?;
        let mut rng = self.next_stream();
        self.ledger.grad_queries += 1;
        let mut g = self.instance.objective.gradient(x);
        if self.instance.noise.sigma1 > T::zero() {
            for (gi, n) in g.iter_mut().zip(self.grad_noise(&mut rng)) {
                *gi += n;
            }
        }
        Ok(g)
    }

    fn hvp(&mut self, x: &[T], v: &[T]) -> Result<Vec<T>> {
        check_point(self.dim(), x)?;
        check_dim(self.dim(), v.len())?;
        if !all_finite(v) {
            return Err(Error::InvalidInput("direction has non-finite entries".into()));
        }
        let mut rng = self.next_stream();
        self.ledger.hvp_queries += 1;
        let mut out = self.instance.objective.hvp(x, v);
        if self.instance.noise.sigma2 > T::zero() {
            let (a, u) = self.hess_noise(&mut rng);
            let c = a * dot(&u, v);
            crate::linalg::axpy(c, &u, &mut out);
        }
        Ok(out)
    }

    fn hess(&mut self, x: &[T]) -> Result<SymMatrix<T>> {
        check_point(self.dim(), x)?;
        let mut rng = self.next_stream();
        self.ledger.hess_queries += 1;
        let mut h = self.instance.objective.hessian(x);
        if self.instance.noise.sigma2 > T::zero() {
            let (a, u) = self.hess_noise(&mut rng);
            h.add_rank_one(a, &u);
        }
        Ok(h)
    }

    fn ledger(&self) -> QueryLedger {
        self.ledger
    }

    fn hessian_noise_bound(&self) -> Option<T> {
        self.instance.noise.sigma2_as
    }
}

impl<T: Real> MultiPointOracle<T> for NoisyOracle<'_, T> {
    fn max_points(&self) -> usize {
        match self.instance.noise.mode {
            QueryMode::SinglePoint => 1,
            QueryMode::NPoint(n) => n,
        }
    }

    fn grad_multi(&mut self, xs: &[&[T]]) -> Result<Vec<Vec<T>>> {
        if xs.len() > self.max_points() {
            return Err(Error::Contract(format!(
                "{} points requested but the oracle allows {}",
                xs.len(),
                self.max_points()
            )));
        }
        for x in xs {
            check_point(self.dim(), x)?;
        }
        let mut rng = self.next_stream();
        self.ledger.grad_queries += 1;
        let noise = self.grad_noise(&mut rng);
        Ok(xs
            .iter()
            .map(|x| {
                let mut g = self.instance.objective.gradient(x);
                if self.instance.noise.sigma1 > T::zero() {
                    crate::linalg::axpy(T::one(), &noise, &mut g);
                }
                g
            })
            .collect())
    }

    fn jacobian_consistent(&self) -> bool {
        // Gradient noise does not depend on x, so its Jacobian is the exact
        // Hessian; only a noiseless Hessian channel matches it.
        self.instance.noise.sigma2 == T::zero()
    }

    fn exact_gradient(&self, x: &[T]) -> Vec<T> {
        self.instance.objective.gradient(x)
    }

    fn hessian_variance(&self) -> T {
        self.instance.noise.sigma2 * self.instance.noise.sigma2
    }
}
