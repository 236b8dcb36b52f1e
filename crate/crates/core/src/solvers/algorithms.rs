//! The solvers. Each has an instance-level entry point and a `_with` variant
//! that runs against any oracle, using the instance only for constants and
//! exact diagnostics.

use super::params::{CubicRvrParams, ParamMode, SgdRvrParams, SolverParams, SospCubicParams, SospHvpParams};
use super::run::{check_projection, RunOptions, RunResult, Tracker};
use crate::error::{Error, Result};
use crate::linalg::{add, axpy, SymMatrix};
use crate::oracle::{Oracle, ProblemInstance};
use crate::rng::{algorithm_rng, bernoulli, oracle_seed};
use crate::rvr::{estimate, expected_query_budget, EstimatorState, RvrConfig};
use crate::scalar::Real;
use crate::subproblems::{curvature_step, exact_curvature_direction, oja_plan, oja_search, solve_cubic_tr, CubicModel};

/// Relative KKT tolerance of the cubic subproblem solves.
const CUBIC_TOL: f64 = 1e-9;

fn total<T: Real, O: Oracle<T>>(o: &O) -> u64 {
    o.ledger().total()
}

fn mean_hessian<T: Real, O: Oracle<T>>(oracle: &mut O, x: &[T], n: u64) -> Result<SymMatrix<T>> {
    let mut acc = SymMatrix::zeros(x.len());
    for _ in 0..n {
        acc.add_scaled(T::one(), &oracle.hess(x)?);
    }
    acc.scale(T::one() / T::lit(n as f64));
    Ok(acc)
}

fn regime_notes<T: Real>(inst: &ProblemInstance<T>, eps: T, gamma: Option<T>) -> Vec<String> {
    let mut notes = Vec::new();
    let n = &inst.noise;
    if n.sigma1 > T::zero() && eps >= n.sigma1 {
        notes.push(format!("epsilon {eps} >= sigma1 {}: outside the theorem regime", n.sigma1));
    }
    if let Some(g) = gamma {
        if g > (eps * inst.regularity.l2).sqrt() {
            notes.push(format!("gamma {g} > sqrt(epsilon*L2): outside the theorem regime"));
        }
    }
    notes
}

/// Plain SGD: `x ← x − step·∇̂F(x)` for `horizon` steps, one gradient query
/// each, output uniform over the iterates `x¹ … x^horizon`.
pub fn sgd_baseline<T: Real>(
    inst: &ProblemInstance<T>,
    epsilon: T,
    step: T,
    horizon: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult<T>> {
    let mut oracle = inst.oracle(oracle_seed(seed));
    sgd_baseline_with(&mut oracle, inst, epsilon, step, horizon, seed, opts)
}

#[allow(clippy::too_many_arguments)]
pub fn sgd_baseline_with<T: Real, O: Oracle<T>>(
    oracle: &mut O,
    inst: &ProblemInstance<T>,
    epsilon: T,
    step: T,
    horizon: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult<T>> {
    let l1 = inst.regularity.l1;
    if !(step > T::zero()) || (l1.is_finite() && step > T::one() / (T::lit(2.0) * l1)) {
        return Err(Error::Config(format!("step size {step} must lie in (0, 1/(2 L1)]")));
    }
    check_projection(horizon as f64, opts.budget_cap)?;
    let obj = inst.objective.as_ref();
    let mut tr = Tracker::new(obj, opts, seed, 1, horizon);
    let mut x = vec![T::zero(); inst.dim()];
    for t in 1..=horizon {
        if tr.observe(t, &x, total(oracle)) {
            break;
        }
        let g = oracle.grad(&x)?;
        tr.diag.accounted_queries += 1;
        tr.estimator_error(&x, &g);
        axpy(-step, &g, &mut x);
    }
    let notes = regime_notes(inst, epsilon, None);
    Ok(tr.finish("sgd", ParamMode::Tuned, horizon, oracle.ledger(), seed, x, notes))
}

fn rvr_config<T: Real>(inst: &ProblemInstance<T>, eps: T, b: T, sigma2: T) -> RvrConfig<T> {
    RvrConfig { epsilon: eps, reset_prob: b, sigma1: inst.noise.sigma1, sigma2, l2: inst.regularity.l2 }
}

/// SGD driven by the variance-reduced Hessian-vector-product estimator.
pub fn sgd_hvp_rvr<T: Real>(inst: &ProblemInstance<T>, params: &SolverParams<T>, seed: u64, opts: &RunOptions) -> Result<RunResult<T>> {
    let mut oracle = inst.oracle(oracle_seed(seed));
    sgd_hvp_rvr_with(&mut oracle, inst, params, seed, opts)
}

pub fn sgd_hvp_rvr_with<T: Real, O: Oracle<T>>(
    oracle: &mut O,
    inst: &ProblemInstance<T>,
    params: &SolverParams<T>,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult<T>> {
    let p = SgdRvrParams::derive(params, &inst.regularity, &inst.noise)?;
    let eps = params.epsilon;
    let cfg = rvr_config(inst, eps, p.b, inst.noise.sigma2);
    let projected = p.t as f64 * expected_query_budget(&cfg, p.eta * eps).f64();
    check_projection(projected, opts.budget_cap)?;

    let mut rng = algorithm_rng(seed);
    let mut tr = Tracker::new(inst.objective.as_ref(), opts, seed, 1, p.t);
    let mut state = EstimatorState::new();
    let mut x = vec![T::zero(); inst.dim()];
    for t in 1..=p.t {
        if tr.observe(t, &x, total(oracle)) {
            break;
        }
        let (g, info) = estimate(&mut state, &x, &cfg, oracle, &mut rng)?;
        tr.diag.accounted_queries += info.queries;
        tr.estimator_error(&x, &g);
        axpy(-p.eta, &g, &mut x);
        tr.check_budget(total(oracle), projected)?;
    }
    let notes = regime_notes(inst, eps, None);
    Ok(tr.finish("sgd_hvp_rvr", params.mode(), p.t, oracle.ledger(), seed, x, notes))
}

/// Subsampled cubic trust-region steps with the variance-reduced gradient.
pub fn cubic_rvr<T: Real>(inst: &ProblemInstance<T>, params: &SolverParams<T>, seed: u64, opts: &RunOptions) -> Result<RunResult<T>> {
    let mut oracle = inst.oracle(oracle_seed(seed));
    cubic_rvr_with(&mut oracle, inst, params, seed, opts)
}

pub fn cubic_rvr_with<T: Real, O: Oracle<T>>(
    oracle: &mut O,
    inst: &ProblemInstance<T>,
    params: &SolverParams<T>,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult<T>> {
    let p = CubicRvrParams::derive(params, &inst.regularity, &inst.noise, inst.dim())?;
    let eps = params.epsilon;
    let cfg = rvr_config(inst, eps, p.b, inst.noise.sigma2);
    let projected = p.t as f64 * (p.n_h as f64 + expected_query_budget(&cfg, p.eta).f64());
    check_projection(projected, opts.budget_cap)?;

    let mut rng = algorithm_rng(seed);
    // Candidates are x² … x^{T+1}.
    let mut tr = Tracker::new(inst.objective.as_ref(), opts, seed, 2, p.t + 1);
    let mut state = EstimatorState::new();
    let mut x = vec![T::zero(); inst.dim()];
    let mut notes = regime_notes(inst, eps, None);
    let mut unconverged = 0u64;
    for t in 1..=p.t {
        if t > 1 && tr.observe(t, &x, total(oracle)) {
            break;
        }
        let h = mean_hessian(oracle, &x, p.n_h)?;
        let (g, info) = estimate(&mut state, &x, &cfg, oracle, &mut rng)?;
        tr.diag.accounted_queries += p.n_h + info.queries;
        tr.estimator_error(&x, &g);
        let sol = solve_cubic_tr(&CubicModel { g, h, m: p.m, radius: p.eta }, T::lit(CUBIC_TOL))?;
        unconverged += u64::from(!sol.converged);
        x = add(&x, &sol.step);
        tr.check_budget(total(oracle), projected)?;
    }
    if !tr.stopped_early {
        tr.observe(p.t + 1, &x, total(oracle));
    }
    if unconverged > 0 {
        notes.push(format!("{unconverged} cubic subproblem solves missed the KKT tolerance"));
    }
    Ok(tr.finish("cubic_rvr", params.mode(), p.t, oracle.ledger(), seed, x, notes))
}

/// SGD steps mixed at random with stochastic negative-curvature searches.
pub fn sosp_hvp<T: Real>(inst: &ProblemInstance<T>, params: &SolverParams<T>, seed: u64, opts: &RunOptions) -> Result<RunResult<T>> {
    let mut oracle = inst.oracle(oracle_seed(seed));
    sosp_hvp_with(&mut oracle, inst, params, seed, opts)
}

pub fn sosp_hvp_with<T: Real, O: Oracle<T>>(
    oracle: &mut O,
    inst: &ProblemInstance<T>,
    params: &SolverParams<T>,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult<T>> {
    let p = SospHvpParams::derive(params, &inst.regularity, &inst.noise)?;
    let eps = params.epsilon;
    let gamma = params.gamma.expect("validated by derive");
    let l2 = inst.regularity.l2;
    let cfg_g = rvr_config(inst, eps, p.b_g, p.sigma2_as);
    let cfg_h = rvr_config(inst, eps, p.b_h, p.sigma2_as);
    let plan = oja_plan(inst.dim(), gamma, p.delta, inst.regularity.l1, p.sigma2_as);
    let oja_cost = (plan.iterations + plan.verify_samples) as f64;
    let pf = p.p.f64();
    let projected = p.t as f64
        * (pf * expected_query_budget(&cfg_g, p.eta * eps).f64()
            + (1.0 - pf) * (oja_cost + expected_query_budget(&cfg_h, gamma / l2).f64()));
    check_projection(projected, opts.budget_cap)?;

    let mut rng = algorithm_rng(seed);
    let mut tr = Tracker::new(inst.objective.as_ref(), opts, seed, 1, p.t);
    let mut state = EstimatorState::new();
    let mut x = vec![T::zero(); inst.dim()];
    let (mut g, info) = estimate(&mut state, &x, &cfg_g, oracle, &mut rng)?;
    tr.diag.accounted_queries += info.queries;
    let mut notes = regime_notes(inst, eps, Some(gamma));
    let mut curvature_moves = 0u64;
    for t in 1..=p.t {
        if tr.observe(t, &x, total(oracle)) {
            break;
        }
        tr.estimator_error(&x, &g);
        if bernoulli(&mut rng, pf) {
            axpy(-p.eta, &g, &mut x);
            let (ng, info) = estimate(&mut state, &x, &cfg_g, oracle, &mut rng)?;
            tr.diag.accounted_queries += info.queries;
            g = ng;
        } else {
            let cert = oja_search(oracle, &x, gamma, p.delta, &inst.regularity, &mut rng)?;
            tr.diag.accounted_queries += cert.queries_used;
            if let Some(u) = cert.direction {
                x = curvature_step(&x, &u, gamma, l2, &mut rng);
                let (ng, info) = estimate(&mut state, &x, &cfg_h, oracle, &mut rng)?;
                tr.diag.accounted_queries += info.queries;
                g = ng;
                curvature_moves += 1;
            }
        }
        tr.check_budget(total(oracle), projected)?;
    }
    notes.push(format!("{curvature_moves} negative-curvature moves"));
    Ok(tr.finish("sosp_hvp", params.mode(), p.t, oracle.ledger(), seed, x, notes))
}

/// Cubic steps mixed at random with exact-eigenvector curvature steps on
/// subsampled Hessians.
pub fn sosp_cubic<T: Real>(inst: &ProblemInstance<T>, params: &SolverParams<T>, seed: u64, opts: &RunOptions) -> Result<RunResult<T>> {
    let mut oracle = inst.oracle(oracle_seed(seed));
    sosp_cubic_with(&mut oracle, inst, params, seed, opts)
}

pub fn sosp_cubic_with<T: Real, O: Oracle<T>>(
    oracle: &mut O,
    inst: &ProblemInstance<T>,
    params: &SolverParams<T>,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult<T>> {
    let p = SospCubicParams::derive(params, &inst.regularity, &inst.noise, inst.dim())?;
    let eps = params.epsilon;
    let gamma = params.gamma.expect("validated by derive");
    let l2 = inst.regularity.l2;
    let cfg_g = rvr_config(inst, eps, p.b_g, inst.noise.sigma2);
    let cfg_h = rvr_config(inst, eps, p.b_h, inst.noise.sigma2);
    let pf = p.p.f64();
    let projected = p.t as f64
        * (pf * (p.n1 as f64 + expected_query_budget(&cfg_g, p.eta).f64())
            + (1.0 - pf) * (p.n2 as f64 + expected_query_budget(&cfg_h, gamma / l2).f64()));
    check_projection(projected, opts.budget_cap)?;

    let mut rng = algorithm_rng(seed);
    // Candidates are x¹ … x^{T−1}.
    let mut tr = Tracker::new(inst.objective.as_ref(), opts, seed, 1, p.t.saturating_sub(1));
    let mut state = EstimatorState::new();
    let mut x = vec![T::zero(); inst.dim()];
    let (mut g, info) = estimate(&mut state, &x, &cfg_g, oracle, &mut rng)?;
    tr.diag.accounted_queries += info.queries;
    let mut notes = regime_notes(inst, eps, Some(gamma));
    let mut curvature_moves = 0u64;
    for t in 1..=p.t {
        if tr.observe(t, &x, total(oracle)) {
            break;
        }
        tr.estimator_error(&x, &g);
        if bernoulli(&mut rng, pf) {
            let h = mean_hessian(oracle, &x, p.n1)?;
            let sol = solve_cubic_tr(&CubicModel { g: g.clone(), h, m: p.m, radius: p.eta }, T::lit(CUBIC_TOL))?;
            x = add(&x, &sol.step);
            let (ng, info) = estimate(&mut state, &x, &cfg_g, oracle, &mut rng)?;
            tr.diag.accounted_queries += p.n1 + info.queries;
            g = ng;
        } else {
            let h = mean_hessian(oracle, &x, p.n2)?;
            tr.diag.accounted_queries += p.n2;
            if let Some(u) = exact_curvature_direction(&h, gamma) {
                x = curvature_step(&x, &u, gamma, l2, &mut rng);
                let (ng, info) = estimate(&mut state, &x, &cfg_h, oracle, &mut rng)?;
                tr.diag.accounted_queries += info.queries;
                g = ng;
                curvature_moves += 1;
            }
        }
        tr.check_budget(total(oracle), projected)?;
    }
    notes.push(format!("{curvature_moves} negative-curvature moves"));
    Ok(tr.finish("sosp_cubic", params.mode(), p.t, oracle.ledger(), seed, x, notes))
}
