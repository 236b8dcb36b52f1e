//! Greedy zero-respecting algorithm against a zero-chain oracle.

use super::zero_chain::{support, ZeroChainOracle};
use crate::error::Result;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgressTrajectory {
    /// `(query index, progress)` recorded whenever progress increases; starts at `(0, 0)`.
    pub points: Vec<(u64, usize)>,
    pub queries: u64,
    pub final_progress: usize,
    /// Query at which the whole chain was discovered.
    pub completed_at: Option<u64>,
}

/// Query count below which full discovery has probability at most `δ`:
/// `(T − ln(1/δ)) / (2ρ)`.
pub fn progress_deadline(t: usize, rho: f64, delta: f64) -> f64 {
    (t as f64 - (1.0 / delta).ln()) / (2.0 * rho)
}

/// Runs the support chaser: query the point equal to `1/β` on the discovered
/// support and zero elsewhere, and extend the support whenever an answer has
/// a nonzero entry on the next coordinate.
pub fn zero_respecting_run<T: Real>(oracle: &mut ZeroChainOracle<T>, max_queries: u64) -> Result<ProgressTrajectory> {
    let n = oracle.chain.t;
    let level = T::one() / oracle.chain.beta;
    let mut x = vec![T::zero(); n];
    let mut found = 0usize;
    let mut points = vec![(0, 0)];
    let mut queries = 0;
    let mut completed_at = None;
    while queries < max_queries && found < n {
        let a = oracle.query_all(&x)?;
        queries += 1;
        let reach = support(&a.gradient).max(a.hessian.support());
        if reach > found {
            // Answers never reach beyond the next coordinate.
            found = (found + 1).min(reach);
            x[found - 1] = level;
            points.push((queries, found));
            if found == n {
                completed_at = Some(queries);
            }
        }
    }
    Ok(ProgressTrajectory { points, queries, final_progress: found, completed_at })
}
