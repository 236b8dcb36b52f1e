//! JSON experiment configuration.

use anyhow::{bail, ensure, Context, Result};
use hvpopt::hard::{chain_constants, ChainFunction, ChainKind};
use hvpopt::linalg::SymMatrix;
use hvpopt::objective::{Component, FiniteSum, LambdaSum, Objective, Quadratic};
use hvpopt::oracle::{NoiseLaw, NoiseParams, ProblemInstance, QueryMode, RegularityParams};
use hvpopt::solvers::{Overrides, DEFAULT_BUDGET_CAP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Sweep,
    Lowerbound,
    Verify,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Lowerbound => "lowerbound",
            Command::Verify => "verify",
        }
    }
}

/// Exact objective of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `½ Σ a_i x_i² − bᵀx` with diagonal `a` (length `dim`, or one value repeated).
    Quadratic {
        diag: Vec<f64>,
        #[serde(default)]
        b: Vec<f64>,
    },
    /// `α Σ Λ(β(x_i − c_i))`; a single center is repeated over all coordinates.
    LambdaSum {
        centers: Vec<f64>,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default = "one")]
        beta: f64,
    },
    /// The `ε`-indexed family `Σ Λ(ε x_i − u0)`: every member is the same
    /// landscape stretched by `1/ε`, with gradients of order `ε`.
    LambdaRamp {
        #[serde(default = "one")]
        u0: f64,
    },
    /// Scaled chain `α f(βx)` of length `dim`.
    Chain {
        chain: ChainKind,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default = "one")]
        beta: f64,
    },
    /// Regularised logistic regression on Gaussian features with random labels.
    LogisticErm {
        samples: usize,
        #[serde(default = "default_reg")]
        reg: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_reg() -> f64 {
    0.1
}

/// Instance description; missing regularity constants are derived from the problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub dim: usize,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub delta: Option<f64>,
    /// `null` derives it; use a very large value for an unbounded class.
    #[serde(default)]
    pub l1: Option<f64>,
    #[serde(default)]
    pub l2: Option<f64>,
    pub sigma1: f64,
    pub sigma2: f64,
    #[serde(default)]
    pub sigma2_as: Option<f64>,
    #[serde(default = "single_point")]
    pub mode: QueryMode,
    #[serde(default)]
    pub law: NoiseLaw,
    /// Seed for randomly generated problem data.
    #[serde(default)]
    pub seed: u64,
}

fn single_point() -> QueryMode {
    QueryMode::SinglePoint
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Sgd,
    SgdHvpRvr,
    CubicRvr,
    SospHvp,
    SospCubic,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Sgd => "sgd",
            Algorithm::SgdHvpRvr => "sgd_hvp_rvr",
            Algorithm::CubicRvr => "cubic_rvr",
            Algorithm::SospHvp => "sosp_hvp",
            Algorithm::SospCubic => "sosp_cubic",
        }
    }

    pub fn needs_gamma(self) -> bool {
        matches!(self, Algorithm::SospHvp | Algorithm::SospCubic)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub overrides: Overrides,
    /// Baseline SGD step as a multiple of `ε²` (capped at `1/(2L₁)`).
    #[serde(default = "default_sgd_step")]
    pub sgd_step_scale: f64,
    /// Baseline SGD horizon; defaults to `⌈4Δ/(step·ε²)⌉`.
    #[serde(default)]
    pub sgd_horizon: Option<u64>,
}

fn default_sgd_step() -> f64 {
    0.5
}

/// How lower-bound simulations obtain their chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Construction {
    /// Unit chain of the given length and revelation probability.
    Direct { chain: ChainKind, t: usize, rho: f64 },
    /// Gradient chain scaled for the given targets.
    EpsInstance { epsilon: f64, l1: f64, l2: f64, sigma1: f64, sigma2: f64, delta: f64 },
    /// Curvature chain scaled for the given targets.
    GammaInstance { gamma: f64, l2: f64, sigma2: f64, delta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundSpec {
    pub construction: Construction,
    /// Failure probability of the progress deadline.
    pub delta: f64,
    /// Query cap per run; defaults to `max(8·deadline, 4T/ρ)`.
    #[serde(default)]
    pub max_queries: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub instance: Option<InstanceSpec>,
    #[serde(default)]
    pub solver: Option<SolverSpec>,
    #[serde(default)]
    pub epsilon_grid: Vec<f64>,
    #[serde(default = "one_rep")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub lowerbound: Option<LowerBoundSpec>,
    #[serde(default = "default_cap")]
    pub budget_cap: u64,
    /// Stop each sweep run at its first passage instead of its full horizon.
    #[serde(default)]
    pub stop_at_first_passage: bool,
    /// Fill the `wall_ms` column; off by default so outputs are byte-reproducible.
    #[serde(default)]
    pub timing: bool,
    /// Suites for `verify`.
    #[serde(default)]
    pub suites: Vec<String>,
}

fn one_rep() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("hvpopt-out")
}

fn default_cap() -> u64 {
    DEFAULT_BUDGET_CAP
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.replications >= 1, "replications must be at least 1");
        ensure!(
            self.epsilon_grid.iter().all(|e| *e > 0.0 && e.is_finite()),
            "epsilon grid entries must be positive"
        );
        ensure!(
            self.epsilon_grid.windows(2).all(|w| w[0] > w[1]),
            "epsilon grid must be strictly decreasing"
        );
        match self.command {
            Command::Solve | Command::Sweep => {
                ensure!(self.instance.is_some(), "{} needs an instance", self.command.as_str());
                let solver = self.solver.as_ref().context("missing solver")?;
                ensure!(!self.epsilon_grid.is_empty(), "epsilon grid is empty");
                if solver.algorithm.needs_gamma() {
                    ensure!(solver.gamma.is_some(), "{} needs gamma", solver.algorithm.as_str());
                }
                if self.command == Command::Sweep {
                    ensure!(self.epsilon_grid.len() >= 2, "a sweep needs at least two epsilon values");
                }
            }
            Command::Lowerbound => {
                let lb = self.lowerbound.as_ref().context("lowerbound needs a lowerbound section")?;
                ensure!(lb.delta > 0.0 && lb.delta < 1.0, "delta must lie in (0, 1)");
            }
            Command::Verify => {}
        }
        Ok(())
    }
}

/// Diagonal data expanded to `dim` entries.
fn expand(v: &[f64], dim: usize, what: &str) -> Result<Vec<f64>> {
    match v.len() {
        0 => Ok(vec![0.0; dim]),
        1 => Ok(vec![v[0]; dim]),
        n if n == dim => Ok(v.to_vec()),
        n => bail!("{what} has {n} entries, expected 1 or {dim}"),
    }
}

/// Objective and its derived regularity constants `(Δ, L₁, L₂)`.
fn build_objective(spec: &InstanceSpec, epsilon: f64) -> Result<(Arc<dyn Objective<f64>>, [f64; 3])> {
    let d = spec.dim;
    ensure!(d >= 1, "dim must be positive");
    Ok(match &spec.problem {
        ProblemSpec::Quadratic { diag, b } => {
            let a = expand(diag, d, "diag")?;
            let b = expand(b, d, "b")?;
            ensure!(a.iter().all(|v| *v > 0.0), "quadratic needs a positive diagonal");
            let max = a.iter().cloned().fold(0.0, f64::max);
            let gap = b.iter().zip(&a).map(|(bi, ai)| bi * bi / (2.0 * ai)).sum::<f64>();
            // Any positive L₂ is valid for a quadratic; 1 keeps the step formulas finite.
            (Arc::new(Quadratic::new(SymMatrix::from_diag(&a), b)), [gap, max, 1.0])
        }
        ProblemSpec::LambdaSum { centers, alpha, beta } => {
            let f = LambdaSum::scaled(expand(centers, d, "centers")?, *alpha, *beta);
            let c = [f.gap_at_origin(), f.gradient_lipschitz(), f.hessian_lipschitz()];
            (Arc::new(f), c)
        }
        ProblemSpec::LambdaRamp { u0 } => {
            let f = LambdaSum::scaled(vec![u0 / epsilon; d], 1.0, epsilon);
            let c = [f.gap_at_origin(), f.gradient_lipschitz(), f.hessian_lipschitz()];
            (Arc::new(f), c)
        }
        ProblemSpec::Chain { chain, alpha, beta } => {
            let f = ChainFunction::scaled(*chain, d, *alpha, *beta);
            let k = chain_constants(*chain);
            let c = [f.gap_bound(), alpha * beta * beta * k.l1, alpha * beta.powi(3) * k.l2];
            (Arc::new(f), c)
        }
        ProblemSpec::LogisticErm { samples, reg } => {
            ensure!(*samples >= 1, "logistic_erm needs samples >= 1");
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let comps: Vec<Component<f64>> = (0..*samples)
                .map(|_| {
                    let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    Component::Logistic { a, y, reg: *reg }
                })
                .collect();
            let max_sq = comps
                .iter()
                .map(|c| match c {
                    Component::Logistic { a, .. } => a.iter().map(|v| v * v).sum::<f64>(),
                    Component::Quadratic { .. } => 0.0,
                })
                .fold(0.0, f64::max);
            // Softplus has curvature at most 1/4 and third derivative at most 1/(6√3).
            let l1 = max_sq / 4.0 + reg;
            let l2 = max_sq.powf(1.5) / (6.0 * 3f64.sqrt());
            let f = FiniteSum::new(d, comps);
            let gap = f.value(&vec![0.0; d]);
            (Arc::new(f), [gap, l1, l2.max(1e-12)])
        }
    })
}

/// Builds the instance for target `epsilon` (only the ramp family depends on it).
pub fn build_instance(spec: &InstanceSpec, epsilon: f64) -> Result<ProblemInstance<f64>> {
    let (objective, [gap, l1, l2]) = build_objective(spec, epsilon)?;
    let regularity = RegularityParams::new(spec.delta.unwrap_or(gap), spec.l1.unwrap_or(l1), spec.l2.unwrap_or(l2))?;
    let noise = NoiseParams {
        sigma1: spec.sigma1,
        sigma2: spec.sigma2,
        sigma2_as: spec.sigma2_as,
        mode: spec.mode,
        law: spec.law,
    };
    Ok(ProblemInstance::new(objective, regularity, noise)?)
}
