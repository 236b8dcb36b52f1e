//! Parameter schedules of the solvers.
//!
//! Every parameter is computed from its formula unless overridden by name.
//! Parameters are resolved in dependency order, so an override feeds into
//! the formulas of the parameters derived after it (overriding `eta` changes
//! `T` unless `T` is overridden too).

use crate::error::{Error, Result};
use crate::oracle::{NoiseParams, RegularityParams};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Named parameter overrides; `None` keeps the formula value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub eta: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<u64>,
    pub b: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub p: Option<f64>,
    pub n_h: Option<u64>,
    pub n1: Option<u64>,
    pub n2: Option<u64>,
    pub b_g: Option<f64>,
    pub b_h: Option<f64>,
    /// Failure probability handed to the curvature search.
    pub delta: Option<f64>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    /// Every parameter from its formula.
    Theory,
    /// At least one parameter overridden.
    Tuned,
}

impl std::fmt::Display for ParamMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ParamMode::Theory => "theory",
            ParamMode::Tuned => "tuned",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams<T> {
    pub epsilon: T,
    pub gamma: Option<T>,
    pub overrides: Overrides,
}

impl<T: Real> SolverParams<T> {
    pub fn new(epsilon: T) -> Self {
        Self { epsilon, gamma: None, overrides: Overrides::default() }
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_overrides(mut self, overrides: Overrides) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn mode(&self) -> ParamMode {
        if self.overrides.is_empty() {
            ParamMode::Theory
        } else {
            ParamMode::Tuned
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero() && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if let Some(g) = self.gamma {
            if !(g > T::zero() && g.is_finite()) {
                return Err(Error::Config(format!("gamma must be > 0, got {g}")));
            }
        }
        Ok(())
    }

    fn gamma_required(&self) -> Result<T> {
        self.gamma.ok_or_else(|| Error::Config("this solver needs a curvature target gamma".into()))
    }
}

/// `max{1, ln d}`.
pub fn log_dim<T: Real>(d: usize) -> T {
    T::count(d).ln().max(T::one())
}

fn ceil_count<T: Real>(v: T, what: &str) -> Result<u64> {
    let c = v.ceil();
    if !c.is_finite() || c < T::zero() || c > T::lit(u64::MAX as f64 / 2.0) {
        return Err(Error::Config(format!("{what} = {} is not a usable count", v.f64())));
    }
    Ok(c.to_u64().unwrap_or(0))
}

fn pick<T: Real>(o: Option<f64>, formula: impl FnOnce() -> T) -> T {
    o.map_or_else(formula, T::lit)
}

fn pick_count<T: Real>(o: Option<u64>, formula: T, what: &str) -> Result<u64> {
    match o {
        Some(v) => Ok(v),
        None => ceil_count(formula, what),
    }
}

/// `min{1, num/σ₁}`, with `1` when `σ₁ = 0`.
fn reset_prob<T: Real>(num: T, sigma1: T) -> T {
    if sigma1 > T::zero() {
        T::one().min(num / sigma1)
    } else {
        T::one()
    }
}

/// `σ₂²ε·log d/σ₁²`, dropped (zero) when `σ₁ = 0`.
fn noise_curvature<T: Real>(sigma1: T, sigma2: T, eps: T, log_d: T) -> T {
    if sigma1 > T::zero() {
        eps * sigma2 * sigma2 * log_d / (sigma1 * sigma1)
    } else {
        T::zero()
    }
}

fn check_prob<T: Real>(v: T, what: &str) -> Result<T> {
    if v > T::zero() && v <= T::one() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{what} must lie in (0, 1], got {v}")))
    }
}

fn finite_l1<T: Real>(reg: &RegularityParams<T>) -> Result<T> {
    if reg.l1.is_finite() {
        Ok(reg.l1)
    } else {
        Err(Error::Contract("this solver needs a finite gradient Lipschitz constant".into()))
    }
}

/// SGD with the variance-reduced estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgdRvrParams<T> {
    pub eta: T,
    pub t: u64,
    pub b: T,
}

impl<T: Real> SgdRvrParams<T> {
    /// `η = 1/(2√(L₁² + σ₂² + εL₂))`, `T = ⌈2Δ/(ηε²)⌉`, `b = min{1, ηε√(σ₂² + εL₂)/σ₁}`.
    pub fn derive(p: &SolverParams<T>, reg: &RegularityParams<T>, noise: &NoiseParams<T>) -> Result<Self> {
        p.validate()?;
        let l1 = finite_l1(reg)?;
        let (e, o) = (p.epsilon, &p.overrides);
        let s2 = noise.sigma2;
        let curv = s2 * s2 + e * reg.l2;
        let eta = pick(o.eta, || T::one() / (T::lit(2.0) * (l1 * l1 + curv).sqrt()));
        let t = pick_count(o.t, T::lit(2.0) * reg.delta / (eta * e * e), "T")?;
        let b = check_prob(pick(o.b, || reset_prob(eta * e * curv.sqrt(), noise.sigma1)), "b")?;
        Ok(Self { eta, t, b })
    }
}

/// Subsampled cubic trust-region method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicRvrParams<T> {
    pub m: T,
    pub eta: T,
    pub t: u64,
    pub n_h: u64,
    pub b: T,
    pub log_d: T,
}

impl<T: Real> CubicRvrParams<T> {
    /// `M = 5max{L₂, εσ₂² log d/σ₁²}`, `η = 25√(ε/M)`, `T = ⌈5Δ/(3ηε)⌉`,
    /// `n_H = ⌈22σ₂²η² log d/ε²⌉`, `b = min{1, η√(σ₂² + εL₂)/(25σ₁)}`.
    pub fn derive(p: &SolverParams<T>, reg: &RegularityParams<T>, noise: &NoiseParams<T>, dim: usize) -> Result<Self> {
        p.validate()?;
        let (e, o) = (p.epsilon, &p.overrides);
        let (s1, s2) = (noise.sigma1, noise.sigma2);
        let log_d = log_dim::<T>(dim);
        let m = pick(o.m, || T::lit(5.0) * reg.l2.max(noise_curvature(s1, s2, e, log_d)));
        let eta = pick(o.eta, || T::lit(25.0) * (e / m).sqrt());
        let t = pick_count(o.t, T::lit(5.0) * reg.delta / (T::lit(3.0) * eta * e), "T")?;
        let n_h = pick_count(o.n_h, T::lit(22.0) * s2 * s2 * eta * eta * log_d / (e * e), "n_H")?.max(1);
        let b = check_prob(
            pick(o.b, || reset_prob(eta * (s2 * s2 + e * reg.l2).sqrt() / T::lit(25.0), s1)),
            "b",
        )?;
        Ok(Self { m, eta, t, n_h, b, log_d })
    }
}

/// SGD with stochastic negative-curvature search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SospHvpParams<T> {
    pub eta: T,
    pub t: u64,
    pub p: T,
    pub b_g: T,
    pub b_h: T,
    /// Failure probability of each curvature search.
    pub delta: T,
    pub sigma2_as: T,
}

impl<T: Real> SospHvpParams<T> {
    /// `η = min{γ/(εL₂), 1/(2√(L₁² + σ̄₂² + εL₂))}`, `T = ⌈20ΔL₂²/γ³ + 2Δ/(ηε²)⌉`,
    /// `p = γ³/(γ³ + 10ΔL₂²ηε²)`, `b_g = min{1, ηε√(σ̄₂² + εL₂)/σ₁}`,
    /// `b_H = min{1, γ√(σ̄₂² + εL₂)/(σ₁L₂)}`, `δ = min{γ/(1600L₂), γ/(1600L₁)}`.
    pub fn derive(p: &SolverParams<T>, reg: &RegularityParams<T>, noise: &NoiseParams<T>) -> Result<Self> {
        p.validate()?;
        let gamma = p.gamma_required()?;
        let l1 = finite_l1(reg)?;
        let sbar = noise
            .sigma2_as
            .ok_or_else(|| Error::Contract("curvature search needs an almost-sure Hessian noise bound".into()))?;
        let (e, o, l2, delta) = (p.epsilon, &p.overrides, reg.l2, reg.delta);
        let curv = sbar * sbar + e * l2;
        let eta = pick(o.eta, || (gamma / (e * l2)).min(T::one() / (T::lit(2.0) * (l1 * l1 + curv).sqrt())));
        let g3 = gamma * gamma * gamma;
        let t = pick_count(
            o.t,
            T::lit(20.0) * delta * l2 * l2 / g3 + T::lit(2.0) * delta / (eta * e * e),
            "T",
        )?;
        let prob = check_prob(pick(o.p, || g3 / (g3 + T::lit(10.0) * delta * l2 * l2 * eta * e * e)), "p")?;
        let b_g = check_prob(pick(o.b_g, || reset_prob(eta * e * curv.sqrt(), noise.sigma1)), "b_g")?;
        let b_h = check_prob(pick(o.b_h, || reset_prob(gamma * curv.sqrt() / l2, noise.sigma1)), "b_H")?;
        let fail = pick(o.delta, || {
            let c = T::lit(1600.0);
            (gamma / (c * l2)).min(gamma / (c * l1)).min(T::lit(0.5))
        });
        if !(fail > T::zero() && fail < T::one()) {
            return Err(Error::Config(format!("curvature-search failure probability must lie in (0, 1), got {fail}")));
        }
        Ok(Self { eta, t, p: prob, b_g, b_h, delta: fail, sigma2_as: sbar })
    }
}

/// Subsampled cubic method with exact-eigenvector curvature steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SospCubicParams<T> {
    pub m: T,
    pub eta: T,
    pub t: u64,
    pub p: T,
    pub n1: u64,
    pub n2: u64,
    pub b_g: T,
    pub b_h: T,
    pub log_d: T,
}

impl<T: Real> SospCubicParams<T> {
    /// `M = 4max{L₂, σ₂²ε log d/σ₁²}`, `η = 30√(ε/M)`,
    /// `T = ⌈18ΔL₂²/γ³ + Δ√M/(30ε^{3/2})⌉`, `p = √Mγ^{3/2}/(√Mγ^{3/2} + 540L₂²ε^{3/2})`,
    /// `n₁ = ⌈2·10⁴σ₂² log d/(εM)⌉`, `n₂ = ⌈440σ₂² log d/γ²⌉`,
    /// `b_g = min{1, η√(σ₂² + εL₂)/(30σ₁)}`, `b_H = min{1, γ√(σ₂² + εL₂)/(σ₁L₂)}`.
    pub fn derive(p: &SolverParams<T>, reg: &RegularityParams<T>, noise: &NoiseParams<T>, dim: usize) -> Result<Self> {
        p.validate()?;
        let gamma = p.gamma_required()?;
        let (e, o, l2, delta) = (p.epsilon, &p.overrides, reg.l2, reg.delta);
        let (s1, s2) = (noise.sigma1, noise.sigma2);
        let log_d = log_dim::<T>(dim);
        let m = pick(o.m, || T::lit(4.0) * l2.max(noise_curvature(s1, s2, e, log_d)));
        let eta = pick(o.eta, || T::lit(30.0) * (e / m).sqrt());
        let e15 = e * e.sqrt();
        let t = pick_count(
            o.t,
            T::lit(18.0) * delta * l2 * l2 / (gamma * gamma * gamma) + delta * m.sqrt() / (T::lit(30.0) * e15),
            "T",
        )?;
        let num = m.sqrt() * gamma * gamma.sqrt();
        let prob = check_prob(pick(o.p, || num / (num + T::lit(540.0) * l2 * l2 * e15)), "p")?;
        let n1 = pick_count(o.n1, T::lit(2e4) * s2 * s2 * log_d / (e * m), "n1")?.max(1);
        let n2 = pick_count(o.n2, T::lit(440.0) * s2 * s2 * log_d / (gamma * gamma), "n2")?.max(1);
        let curv = (s2 * s2 + e * l2).sqrt();
        let b_g = check_prob(pick(o.b_g, || reset_prob(eta * curv / T::lit(30.0), s1)), "b_g")?;
        let b_h = check_prob(pick(o.b_h, || reset_prob(gamma * curv / l2, s1)), "b_H")?;
        Ok(Self { m, eta, t, p: prob, n1, n2, b_g, b_h, log_d })
    }
}
