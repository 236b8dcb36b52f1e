//! Recursive variance-reduced gradient estimator driven by stochastic
//! Hessian-vector products.
//!
//! Each call either restarts from a fresh mini-batch of `n = ⌈5σ₁²/ε²⌉`
//! gradients (with probability `b`, or on the first call) or transports the
//! previous estimate along the segment from the previous point with `K`
//! Hessian-vector queries, `K = ⌈5(σ₂² + L₂ε)‖x − x_prev‖² / (bε²)⌉`.
//!
//! Caller contract: `b` must not depend on the estimator's own past draws.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, norm_sq, sub};
use crate::oracle::{Oracle, ProblemInstance};
use crate::rng::{algorithm_rng, bernoulli, oracle_seed};
use crate::scalar::Real;
use rand::Rng;

/// Upper limit on the path length of one call.
pub const MAX_PATH_STEPS: u64 = 1_000_000_000;
/// Path sums longer than this use compensated accumulation.
pub const COMPENSATED_THRESHOLD: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RvrConfig<T> {
    pub epsilon: T,
    /// Reset probability `b`.
    pub reset_prob: T,
    pub sigma1: T,
    pub sigma2: T,
    pub l2: T,
}

impl<T: Real> RvrConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero() && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.reset_prob > T::zero() && self.reset_prob <= T::one()) {
            return Err(Error::Config(format!("reset probability must lie in (0, 1], got {}", self.reset_prob)));
        }
        if !(self.sigma1 >= T::zero() && self.sigma2 >= T::zero() && self.l2 >= T::zero()) {
            return Err(Error::Config("noise and smoothness constants must be >= 0".into()));
        }
        Ok(())
    }

    /// Fresh mini-batch size; a noiseless gradient channel needs one sample.
    pub fn batch_size(&self) -> u64 {
        let n = (T::lit(5.0) * self.sigma1 * self.sigma1 / (self.epsilon * self.epsilon)).ceil();
        n.to_u64().unwrap_or(u64::MAX).max(1)
    }

    /// Path length for a move of length `dx_norm`.
    pub fn path_steps(&self, dx_norm: T) -> Result<u64> {
        let e = self.epsilon;
        let raw = T::lit(5.0) * (self.sigma2 * self.sigma2 + self.l2 * e) / (self.reset_prob * e * e)
            * dx_norm
            * dx_norm;
        let k = raw.ceil();
        if !k.is_finite() || k > T::lit(MAX_PATH_STEPS as f64) {
            return Err(Error::Config(format!(
                "path length {:e} exceeds {MAX_PATH_STEPS}; epsilon too small for this reset probability and step", raw.f64()
            )));
        }
        Ok(k.to_u64().unwrap_or(0))
    }
}

/// Bound on expected queries per call:
/// `6(1 + bσ₁²/ε² + (σ₂² + L₂ε)·dx²/(bε²))`.
pub fn expected_query_budget<T: Real>(cfg: &RvrConfig<T>, dx_norm: T) -> T {
    let e2 = cfg.epsilon * cfg.epsilon;
    let b = cfg.reset_prob;
    T::lit(6.0)
        * (T::one()
            + b * cfg.sigma1 * cfg.sigma1 / e2
            + (cfg.sigma2 * cfg.sigma2 + cfg.l2 * cfg.epsilon) * dx_norm * dx_norm / (b * e2))
}

/// Carry-over of the recursion. `g_prev` is `None` until the first estimate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EstimatorState<T> {
    pub x_prev: Option<Vec<T>>,
    pub g_prev: Option<Vec<T>>,
}

impl<T: Real> EstimatorState<T> {
    pub fn new() -> Self {
        Self { x_prev: None, g_prev: None }
    }
}

/// What one call did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EstimateInfo {
    pub fresh: bool,
    /// Gradient queries (fresh) or path steps (transport).
    pub queries: u64,
}

/// One estimator call at `x`. Updates `state` to `(x, g)` and returns `g`.
pub fn estimate<T: Real, O: Oracle<T>, R: Rng + ?Sized>(
    state: &mut EstimatorState<T>,
    x: &[T],
    cfg: &RvrConfig<T>,
    oracle: &mut O,
    rng: &mut R,
) -> Result<(Vec<T>, EstimateInfo)> {
    cfg.validate()?;
    check_dim(oracle.dim(), x.len())?;
    let reset = bernoulli(rng, cfg.reset_prob.f64());
    let (g, info) = match (&state.g_prev, &state.x_prev) {
        (Some(g_prev), Some(x_prev)) if !reset => {
            let k = cfg.path_steps(dist(x, x_prev))?;
            let g = transport(g_prev, x_prev, x, k, oracle)?;
            (g, EstimateInfo { fresh: false, queries: k })
        }
        _ => {
            let n = cfg.batch_size();
            let mut acc = vec![T::zero(); x.len()];
            let mut comp = vec![T::zero(); x.len()];
            for _ in 0..n {
                let gi = oracle.grad(x)?;
                kahan_add(&mut acc, &mut comp, &gi, n > COMPENSATED_THRESHOLD);
            }
            let inv = T::one() / T::lit(n as f64);
            acc.iter_mut().for_each(|v| *v *= inv);
            (acc, EstimateInfo { fresh: true, queries: n })
        }
    };
    state.x_prev = Some(x.to_vec());
    state.g_prev = Some(g.clone());
    Ok((g, info))
}

fn kahan_add<T: Real>(acc: &mut [T], comp: &mut [T], v: &[T], compensated: bool) {
    if compensated {
        for ((a, c), &vi) in acc.iter_mut().zip(comp.iter_mut()).zip(v) {
            let y = vi - *c;
            let t = *a + y;
            *c = (t - *a) - y;
            *a = t;
        }
    } else {
        for (a, &vi) in acc.iter_mut().zip(v) {
            *a += vi;
        }
    }
}

/// `g_prev + Σ_{k=1}^{K} Ĥ(x⁽ᵏ⁻¹⁾)(x⁽ᵏ⁾ − x⁽ᵏ⁻¹⁾)` on the uniform grid of the segment.
fn transport<T: Real, O: Oracle<T>>(
    g_prev: &[T],
    x_prev: &[T],
    x: &[T],
    k: u64,
    oracle: &mut O,
) -> Result<Vec<T>> {
    let mut acc = g_prev.to_vec();
    if k == 0 {
        return Ok(acc);
    }
    let kt = T::lit(k as f64);
    let dir: Vec<T> = sub(x, x_prev).into_iter().map(|v| v / kt).collect();
    let mut comp = vec![T::zero(); x.len()];
    let compensated = k > COMPENSATED_THRESHOLD;
    let mut point = x_prev.to_vec();
    for step in 0..k {
        // x⁽ˢᵗᵉᵖ⁾ = (step/K) x + (1 − step/K) x_prev
        let w = T::lit(step as f64) / kt;
        for ((p, &a), &b) in point.iter_mut().zip(x).zip(x_prev) {
            *p = w * a + (T::one() - w) * b;
        }
        let hv = oracle.hvp(&point, &dir)?;
        kahan_add(&mut acc, &mut comp, &hv, compensated);
    }
    Ok(acc)
}

/// Per-step error statistics of the estimator along adaptive trajectories.
#[derive(Clone, Debug)]
pub struct ErrorSuiteReport {
    /// Mean over replications of `‖g⁽ᵗ⁾ − ∇F(x⁽ᵗ⁾)‖²` for each step.
    pub per_step_mean: Vec<f64>,
    /// Mean over replications of queries spent at each step.
    pub per_step_queries: Vec<f64>,
    /// Grand mean of the squared error over all steps and replications.
    pub overall_mean: f64,
    /// Standard error of the grand mean, from per-replication averages.
    pub overall_std_err: f64,
    /// Worst per-step mean.
    pub max_step_mean: f64,
}

impl ErrorSuiteReport {
    /// Rows `(step, sq_error, queries)` for CSV export.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.per_step_mean
            .iter()
            .zip(&self.per_step_queries)
            .enumerate()
            .map(|(t, (&e, &q))| (t + 1, e, q))
    }
}

/// Runs the estimator along trajectories `x⁽ᵗ⁺¹⁾ = next(x⁽ᵗ⁾, g⁽ᵗ⁾)` from `x0`
/// and measures the squared error against the exact gradient.
pub fn estimator_error_suite<T, F>(
    instance: &ProblemInstance<T>,
    next: F,
    x0: &[T],
    cfg: &RvrConfig<T>,
    steps: usize,
    replications: usize,
    seed: u64,
) -> Result<ErrorSuiteReport>
where
    T: Real,
    F: Fn(&[T], &[T]) -> Vec<T>,
{
    if steps == 0 || replications == 0 {
        return Err(Error::InvalidInput("steps and replications must be positive".into()));
    }
    let mut per_step = vec![0.0; steps];
    let mut per_q = vec![0.0; steps];
    let mut rep_means = Vec::with_capacity(replications);
    for rep in 0..replications {
        let run_seed = crate::rng::derive_seed(seed, rep as u64);
        let mut oracle = instance.oracle(oracle_seed(run_seed));
        let mut rng = algorithm_rng(run_seed);
        let mut state = EstimatorState::new();
        let mut x = x0.to_vec();
        let mut acc = 0.0;
        for t in 0..steps {
            let (g, info) = estimate(&mut state, &x, cfg, &mut oracle, &mut rng)?;
            let exact = instance.objective.gradient(&x);
            let e = norm_sq(&sub(&g, &exact)).f64();
            per_step[t] += e;
            per_q[t] += info.queries as f64;
            acc += e;
            x = next(&x, &g);
        }
        rep_means.push(acc / steps as f64);
    }
    let r = replications as f64;
    per_step.iter_mut().for_each(|v| *v /= r);
    per_q.iter_mut().for_each(|v| *v /= r);
    let overall_mean = rep_means.iter().sum::<f64>() / r;
    let var = if replications > 1 {
        rep_means.iter().map(|m| (m - overall_mean).powi(2)).sum::<f64>() / (r - 1.0)
    } else {
        0.0
    };
    let max_step_mean = per_step.iter().cloned().fold(0.0, f64::max);
    Ok(ErrorSuiteReport {
        per_step_mean: per_step,
        per_step_queries: per_q,
        overall_mean,
        overall_std_err: (var / r).sqrt(),
        max_step_mean,
    })
}
