//! Run configuration, bookkeeping and results shared by all solvers.

use super::params::ParamMode;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::objective::Objective;
use crate::oracle::QueryLedger;
use crate::rng::{derive_seed, uniform_index};
use crate::scalar::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_BUDGET_CAP: u64 = 100_000_000;
pub const MAX_TRAJECTORY_POINTS: usize = 10_000;

/// When a run counts as having reached its target, for first-passage reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassageRule {
    /// Exact `‖∇F(x_t)‖ ≤ threshold` at the current iterate.
    GradNorm(f64),
    /// Mean of exact `‖∇F‖²` over the output candidates so far `≤ threshold²`,
    /// i.e. the expected squared gradient norm of an output drawn now.
    MeanSquaredGradNorm(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// Refuse runs whose projected or actual query count exceeds this.
    pub budget_cap: u64,
    pub record_trajectory: bool,
    pub max_trajectory_points: usize,
    pub first_passage: Option<PassageRule>,
    /// End the run once the first-passage rule fires; the output is then the current iterate.
    pub stop_at_first_passage: bool,
    /// Track exact per-step estimator errors and gradient norms (costs one exact gradient per step).
    pub diagnostics: bool,
    /// Seed of the output-selection draw; derived from the run seed when absent.
    pub selection_seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            budget_cap: DEFAULT_BUDGET_CAP,
            record_trajectory: false,
            max_trajectory_points: MAX_TRAJECTORY_POINTS,
            first_passage: None,
            stop_at_first_passage: false,
            diagnostics: false,
            selection_seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: u64,
    pub queries: u64,
    pub grad_norm: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstPassage {
    pub iteration: u64,
    pub queries: u64,
}

/// Exact diagnostics accumulated along the run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `max_t ‖g_t − ∇F(x_t)‖` over estimator outputs.
    pub max_estimator_error: f64,
    /// Mean of `‖∇F‖²` over the output candidates.
    pub mean_sq_grad_norm: f64,
    /// Sum over steps of the queries each step declared.
    pub accounted_queries: u64,
}

#[derive(Clone, Debug)]
pub struct RunResult<T> {
    pub algorithm: String,
    pub mode: ParamMode,
    pub output_point: Vec<T>,
    /// Index of the returned iterate.
    pub output_index: u64,
    pub iterations: u64,
    pub ledger: QueryLedger,
    /// Computed from the exact objective at the output point.
    pub grad_norm_exact: T,
    pub lambda_min_exact: T,
    pub iterates_kept: Option<Vec<TrajectoryPoint>>,
    pub seed: u64,
    pub first_passage: Option<FirstPassage>,
    pub diagnostics: Option<Diagnostics>,
    pub stopped_early: bool,
    pub notes: Vec<String>,
}

/// Per-run bookkeeping: output selection, trajectory, first passage.
pub(crate) struct Tracker<'a, T: Real> {
    objective: &'a dyn Objective<T>,
    opts: &'a RunOptions,
    /// Candidate range `lo..=hi` and the pre-drawn output index in it.
    lo: u64,
    hi: u64,
    pub output_index: u64,
    output: Option<Vec<T>>,
    stride: u64,
    trajectory: Vec<TrajectoryPoint>,
    first_passage: Option<FirstPassage>,
    sum_sq: f64,
    candidates: u64,
    pub diag: Diagnostics,
    pub stopped_early: bool,
    last: Option<Vec<T>>,
}

impl<'a, T: Real> Tracker<'a, T> {
    /// Output is drawn uniformly from iterates `lo..=hi` (empty range when `hi < lo`).
    pub fn new(objective: &'a dyn Objective<T>, opts: &'a RunOptions, seed: u64, lo: u64, hi: u64) -> Self {
        let sel = opts.selection_seed.unwrap_or_else(|| derive_seed(seed, 0x5E1E));
        let mut rng = ChaCha8Rng::seed_from_u64(sel);
        let output_index = if hi >= lo { lo + uniform_index(&mut rng, (hi - lo + 1) as usize) as u64 } else { lo };
        let span = hi.saturating_sub(lo) + 1;
        let stride = span.div_ceil(opts.max_trajectory_points.max(1) as u64).max(1);
        Self {
            objective,
            opts,
            lo,
            hi,
            output_index,
            output: None,
            stride,
            trajectory: Vec::new(),
            first_passage: None,
            sum_sq: 0.0,
            candidates: 0,
            diag: Diagnostics::default(),
            stopped_early: false,
            last: None,
        }
    }

    fn needs_exact(&self) -> bool {
        self.opts.first_passage.is_some() || self.opts.diagnostics
    }

    /// Records iterate `t`. Returns `true` when the run should stop.
    pub fn observe(&mut self, t: u64, x: &[T], queries: u64) -> bool {
        let candidate = t >= self.lo && t <= self.hi;
        if t == self.output_index {
            self.output = Some(x.to_vec());
        }
        self.last = Some(x.to_vec());
        let record = self.opts.record_trajectory && (t.is_multiple_of(self.stride) || t == self.hi);
        if !(self.needs_exact() || record) {
            return false;
        }
        let g = norm(&self.objective.gradient(x)).f64();
        if record {
            self.trajectory.push(TrajectoryPoint { t, queries, grad_norm: g, value: self.objective.value(x).f64() });
        }
        if candidate {
            self.sum_sq += g * g;
            self.candidates += 1;
        }
        if self.first_passage.is_none() {
            let hit = match self.opts.first_passage {
                Some(PassageRule::GradNorm(thr)) => g <= thr,
                Some(PassageRule::MeanSquaredGradNorm(thr)) => {
                    candidate && self.sum_sq / self.candidates as f64 <= thr * thr
                }
                None => false,
            };
            if hit {
                self.first_passage = Some(FirstPassage { iteration: t, queries });
                if self.opts.stop_at_first_passage {
                    self.stopped_early = true;
                    return true;
                }
            }
        }
        false
    }

    pub fn estimator_error(&mut self, x: &[T], g: &[T]) {
        if self.opts.diagnostics {
            let exact = self.objective.gradient(x);
            let e = exact.iter().zip(g).map(|(a, b)| (*a - *b).f64().powi(2)).sum::<f64>().sqrt();
            self.diag.max_estimator_error = self.diag.max_estimator_error.max(e);
        }
    }

    pub fn check_budget(&self, queries: u64, projected: f64) -> Result<()> {
        if queries > self.opts.budget_cap {
            return Err(Error::BudgetExceeded { required: projected.max(queries as f64), cap: self.opts.budget_cap as f64 });
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    pub fn finish(
        mut self,
        algorithm: &str,
        mode: ParamMode,
        iterations: u64,
        ledger: QueryLedger,
        seed: u64,
        fallback: Vec<T>,
        notes: Vec<String>,
    ) -> RunResult<T> {
        let (output_point, output_index) = match (self.stopped_early, self.output.take()) {
            (false, Some(x)) => (x, self.output_index),
            _ => {
                let t = self.first_passage.map_or(self.output_index, |f| f.iteration);
                (self.last.take().unwrap_or(fallback), t)
            }
        };
        let grad_norm_exact = norm(&self.objective.gradient(&output_point));
        let lambda_min_exact = self.objective.lambda_min(&output_point);
        if self.candidates > 0 {
            self.diag.mean_sq_grad_norm = self.sum_sq / self.candidates as f64;
        }
        RunResult {
            algorithm: algorithm.into(),
            mode,
            output_point,
            output_index,
            iterations,
            ledger,
            grad_norm_exact,
            lambda_min_exact,
            iterates_kept: self.opts.record_trajectory.then_some(self.trajectory),
            seed,
            first_passage: self.first_passage,
            diagnostics: self.opts.diagnostics.then_some(self.diag),
            stopped_early: self.stopped_early,
            notes,
        }
    }
}

/// Refuses a run whose projected query count exceeds the cap.
pub(crate) fn check_projection(projected: f64, cap: u64) -> Result<()> {
    if !projected.is_finite() || projected > cap as f64 {
        return Err(Error::BudgetExceeded { required: projected, cap: cap as f64 });
    }
    Ok(())
}
