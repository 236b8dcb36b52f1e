//! `solve`, `sweep` and `lowerbound` orchestration.

use crate::config::{build_instance, Algorithm, Command, Construction, ExperimentConfig, LowerBoundSpec};
use crate::fit::{median, SlopeFit};
use crate::report::{write_csv, write_json, Manifest, PassageRow, ResultRow, TrajectoryRow, WarningRow};
use anyhow::{Context, Result};
use hvpopt::hard::{
    build_eps_hard_instance, build_gamma_hard_instance, progress_deadline, zero_respecting_run, ChainFunction,
    ChainInstance, ScalingRecipe, ZeroChainOracle,
};
use hvpopt::rng::derive_seed;
use hvpopt::solvers::{
    cubic_rvr, sgd_baseline, sgd_hvp_rvr, sosp_cubic, sosp_hvp, PassageRule, RunOptions, RunResult, SolverParams,
};
use hvpopt::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

/// Run seed `hash(master, command, ε index, replication)`.
pub fn run_seed(master: u64, command: Command, eps_index: usize, rep: usize) -> u64 {
    let c = derive_seed(master, command as u64 + 1);
    derive_seed(derive_seed(c, eps_index as u64), rep as u64)
}

/// Outcome of one configured run.
pub enum RunOutcome {
    Done(Box<RunRecord>),
    /// Refused before or during the run because of the budget cap.
    Skipped(WarningRow),
}

pub struct RunRecord {
    pub row: ResultRow,
    pub passage: PassageRow,
    pub result: RunResult<f64>,
}

/// Runs the configured solver at `epsilon`.
pub fn run_one(cfg: &ExperimentConfig, eps_index: usize, rep: usize) -> Result<RunOutcome> {
    let inst_spec = cfg.instance.as_ref().context("missing instance")?;
    let solver = cfg.solver.as_ref().context("missing solver")?;
    let eps = cfg.epsilon_grid[eps_index];
    let seed = run_seed(cfg.seed, cfg.command, eps_index, rep);
    let inst = build_instance(inst_spec, eps)?;
    let opts = RunOptions {
        budget_cap: cfg.budget_cap,
        first_passage: Some(PassageRule::GradNorm(eps)),
        stop_at_first_passage: cfg.stop_at_first_passage,
        ..RunOptions::default()
    };
    let mut params = SolverParams::new(eps).with_overrides(solver.overrides.clone());
    if let Some(g) = solver.gamma {
        params = params.with_gamma(g);
    }
    let start = Instant::now();
    let res = match solver.algorithm {
        Algorithm::Sgd => {
            let mut step = solver.sgd_step_scale * eps * eps;
            if inst.regularity.l1.is_finite() {
                step = step.min(0.5 / inst.regularity.l1);
            }
            let horizon = solver
                .sgd_horizon
                .unwrap_or_else(|| (4.0 * inst.regularity.delta / (step * eps * eps)).ceil().min(u64::MAX as f64 / 2.0) as u64);
            sgd_baseline(&inst, eps, step, horizon, seed, &opts)
        }
        Algorithm::SgdHvpRvr => sgd_hvp_rvr(&inst, &params, seed, &opts),
        Algorithm::CubicRvr => cubic_rvr(&inst, &params, seed, &opts),
        Algorithm::SospHvp => sosp_hvp(&inst, &params, seed, &opts),
        Algorithm::SospCubic => sosp_cubic(&inst, &params, seed, &opts),
    };
    let wall_ms = if cfg.timing { start.elapsed().as_millis() as u64 } else { 0 };
    let result = match res {
        Ok(r) => r,
        Err(CoreError::BudgetExceeded { required, cap }) => {
            return Ok(RunOutcome::Skipped(WarningRow {
                eps,
                rep,
                seed,
                message: format!("budget cap {cap:.3e} exceeded: run needs about {required:.3e} queries"),
            }))
        }
        Err(e) => return Err(e.into()),
    };
    let gamma = solver.gamma;
    let success = result.grad_norm_exact <= eps && gamma.is_none_or(|g| result.lambda_min_exact >= -g);
    let row = ResultRow {
        command: cfg.command.as_str().into(),
        algorithm: solver.algorithm.as_str().into(),
        eps,
        gamma,
        seed,
        rep,
        queries_grad: result.ledger.grad_queries,
        queries_hvp: result.ledger.hvp_queries,
        queries_hess: result.ledger.hess_queries,
        grad_norm_out: result.grad_norm_exact,
        lambda_min_out: result.lambda_min_exact,
        success,
        wall_ms,
    };
    let passage = PassageRow {
        eps,
        rep,
        seed,
        mode: result.mode.to_string(),
        iterations: result.iterations,
        total_queries: result.ledger.total(),
        first_passage_iteration: result.first_passage.map(|f| f.iteration),
        first_passage_queries: result.first_passage.map(|f| f.queries),
    };
    Ok(RunOutcome::Done(Box::new(RunRecord { row, passage, result })))
}

/// All runs of the grid, in `(ε index, replication)` order.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<Vec<(usize, usize, RunOutcome)>> {
    let jobs: Vec<(usize, usize)> =
        (0..cfg.epsilon_grid.len()).flat_map(|i| (0..cfg.replications).map(move |r| (i, r))).collect();
    let mut out: Vec<(usize, usize, RunOutcome)> = jobs
        .into_par_iter()
        .map(|(i, r)| run_one(cfg, i, r).map(|o| (i, r, o)))
        .collect::<Result<_>>()?;
    out.sort_by_key(|(i, r, _)| (*i, *r));
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub fit: Option<SlopeFit>,
    /// `(ε, median first-passage queries)` of the retained grid points.
    pub medians: Vec<(f64, f64)>,
    /// Grid points where a smaller ε needed fewer median queries.
    pub monotonicity_violations: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Median first-passage queries per grid point and the log-log slope fit.
pub fn summarize(cfg: &ExperimentConfig, runs: &[(usize, usize, RunOutcome)]) -> SweepSummary {
    let mut medians = Vec::new();
    let mut warnings = Vec::new();
    for (i, &eps) in cfg.epsilon_grid.iter().enumerate() {
        let mut skipped = 0;
        let q: Vec<f64> = runs
            .iter()
            .filter(|(j, _, _)| *j == i)
            .filter_map(|(_, _, o)| match o {
                RunOutcome::Done(r) => Some(r.passage.first_passage_queries.map_or(f64::INFINITY, |q| q as f64)),
                RunOutcome::Skipped(_) => {
                    skipped += 1;
                    None
                }
            })
            .collect();
        if skipped > 0 {
            warnings.push(format!("eps {eps}: {skipped} runs refused by the budget cap"));
        }
        match median(&q) {
            Some(m) if m.is_finite() && m > 0.0 => medians.push((eps, m)),
            _ => warnings.push(format!("eps {eps}: fewer than half the runs reached the threshold; point dropped")),
        }
    }
    let mut violations = Vec::new();
    for w in medians.windows(2) {
        // Grid is decreasing in ε, so medians should not decrease.
        if w[1].1 < w[0].1 {
            violations.push(w[1].0);
        }
    }
    let pts: Vec<(f64, f64)> = medians.iter().map(|(e, m)| (e.ln(), m.ln())).collect();
    let fit = SlopeFit::fit(&pts);
    if fit.is_none() {
        warnings.push("fewer than two grid points retained; no slope fit".into());
    }
    SweepSummary { fit, medians, monotonicity_violations: violations, warnings }
}

/// Writes `results.csv`, `first_passage.csv`, `warnings.csv` and `manifest.json`.
pub fn solve_or_sweep(cfg: &ExperimentConfig) -> Result<SweepSummary> {
    let runs = run_grid(cfg)?;
    let mut rows = Vec::new();
    let mut passages = Vec::new();
    let mut warnings = Vec::new();
    let mut seeds = Vec::new();
    for (_, _, o) in &runs {
        match o {
            RunOutcome::Done(r) => {
                seeds.push(r.row.seed);
                rows.push(r.row.clone());
                passages.push(r.passage.clone());
            }
            RunOutcome::Skipped(w) => {
                seeds.push(w.seed);
                warnings.push(w.clone());
            }
        }
    }
    let summary = if cfg.command == Command::Sweep {
        summarize(cfg, &runs)
    } else {
        SweepSummary { fit: None, medians: Vec::new(), monotonicity_violations: Vec::new(), warnings: Vec::new() }
    };
    std::fs::create_dir_all(&cfg.output)?;
    write_csv(&cfg.output.join("results.csv"), &rows)?;
    write_csv(&cfg.output.join("first_passage.csv"), &passages)?;
    write_csv(&cfg.output.join("warnings.csv"), &warnings)?;
    let manifest = Manifest::new(cfg, seeds, serde_json::to_value(&summary)?);
    write_json(&cfg.output.join("manifest.json"), &manifest)?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundSummary {
    pub t: usize,
    pub rho: f64,
    pub delta: f64,
    pub deadline: f64,
    /// `(T − 1)/(2ρ)`.
    pub progress_bound: f64,
    pub runs: usize,
    /// Fraction of runs that discovered the whole chain by the deadline.
    pub deadline_failure_fraction: f64,
    /// Median queries to full progress (runs that never finished count as infinite).
    pub median_completion: f64,
    pub mean_discovery_time: f64,
    pub recipe: Option<ScalingRecipe>,
}

fn chain_for(c: &Construction) -> Result<(ChainFunction<f64>, f64, Option<ScalingRecipe>)> {
    let inst: ChainInstance<f64> = match c {
        Construction::Direct { chain, t, rho } => {
            anyhow::ensure!(*t >= 1, "chain length must be positive");
            return Ok((ChainFunction::unscaled(*chain, *t), *rho, None));
        }
        Construction::EpsInstance { epsilon, l1, l2, sigma1, sigma2, delta } => {
            build_eps_hard_instance(*epsilon, *l1, *l2, *sigma1, *sigma2, *delta)?
        }
        Construction::GammaInstance { gamma, l2, sigma2, delta } => build_gamma_hard_instance(*gamma, *l2, *sigma2, *delta)?,
    };
    Ok((inst.chain, inst.rho, Some(inst.recipe)))
}

/// Zero-respecting simulations; returns the trajectories and a summary.
pub fn lower_bound(spec: &LowerBoundSpec, replications: usize, master: u64) -> Result<(Vec<TrajectoryRow>, LowerBoundSummary)> {
    let (chain, rho, recipe) = chain_for(&spec.construction)?;
    let t = chain.t;
    let deadline = progress_deadline(t, rho, spec.delta);
    let cap = spec.max_queries.unwrap_or_else(|| (8.0 * deadline).max(4.0 * t as f64 / rho).ceil() as u64);
    let runs: Vec<_> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let seed = run_seed(master, Command::Lowerbound, 0, r);
            let mut oracle = ZeroChainOracle::new(chain, rho, seed)?;
            Ok((r, zero_respecting_run(&mut oracle, cap)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut completions = Vec::with_capacity(runs.len());
    let mut failures = 0usize;
    let mut gaps = Vec::new();
    for (r, traj) in &runs {
        for &(q, p) in &traj.points {
            rows.push(TrajectoryRow { run_id: *r, t: q, prog: p });
        }
        for w in traj.points.windows(2) {
            gaps.push((w[1].0 - w[0].0) as f64);
        }
        let c = traj.completed_at.map_or(f64::INFINITY, |c| c as f64);
        if c <= deadline {
            failures += 1;
        }
        completions.push(c);
    }
    let summary = LowerBoundSummary {
        t,
        rho,
        delta: spec.delta,
        deadline,
        progress_bound: (t as f64 - 1.0) / (2.0 * rho),
        runs: replications,
        deadline_failure_fraction: failures as f64 / replications.max(1) as f64,
        median_completion: median(&completions).unwrap_or(f64::NAN),
        mean_discovery_time: if gaps.is_empty() { f64::NAN } else { gaps.iter().sum::<f64>() / gaps.len() as f64 },
        recipe,
    };
    Ok((rows, summary))
}

pub fn lowerbound_command(cfg: &ExperimentConfig) -> Result<LowerBoundSummary> {
    let spec = cfg.lowerbound.as_ref().context("missing lowerbound section")?;
    let (rows, summary) = lower_bound(spec, cfg.replications, cfg.seed)?;
    std::fs::create_dir_all(&cfg.output)?;
    write_csv(&cfg.output.join("trajectories.csv"), &rows)?;
    let seeds = (0..cfg.replications).map(|r| run_seed(cfg.seed, Command::Lowerbound, 0, r)).collect();
    let manifest = Manifest::new(cfg, seeds, serde_json::to_value(&summary)?);
    write_json(&cfg.output.join("manifest.json"), &manifest)?;
    Ok(summary)
}
