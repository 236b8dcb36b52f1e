//! Scalings that turn the unit chains into hard instances for prescribed
//! regularity and noise levels.

use super::chain::{ChainFunction, ChainKind};
use super::constants::{chain_constants, ChainConstants};
use super::zero_chain::ZeroChainOracle;
use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Epsilon(f64),
    Gamma(f64),
}

/// One constraint of the construction: `achieved` must not exceed `limit`
/// (or, for floors, must reach it).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub achieved: f64,
    pub limit: f64,
    /// `true` when `achieved ≥ limit` is required instead of `≤`.
    pub floor: bool,
    pub satisfied: bool,
}

impl ConstraintCheck {
    fn ceiling(name: &str, achieved: f64, limit: f64) -> Self {
        let satisfied = achieved <= limit * (1.0 + 1e-12);
        Self { name: name.into(), achieved, limit, floor: false, satisfied }
    }

    fn floor(name: &str, achieved: f64, limit: f64) -> Self {
        let satisfied = achieved >= limit * (1.0 - 1e-12);
        Self { name: name.into(), achieved, limit, floor: true, satisfied }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecipe {
    pub target: Target,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub t: usize,
    /// Unscaled derivative bounds used by the recipe.
    pub constants: ChainConstants,
    pub checks: Vec<ConstraintCheck>,
}

impl ScalingRecipe {
    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }
}

/// A scaled chain together with the zero-chain oracle parameters.
#[derive(Clone, Debug)]
pub struct ChainInstance<T> {
    pub chain: ChainFunction<T>,
    pub rho: T,
    pub recipe: ScalingRecipe,
}

impl<T: Real> ChainInstance<T> {
    pub fn oracle(&self, seed: u64) -> Result<ZeroChainOracle<T>> {
        ZeroChainOracle::new(self.chain, self.rho, seed)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
    }
}

fn noise_ratio(rho: f64) -> f64 {
    ((1.0 - rho) / rho).sqrt()
}

fn check_length(t: f64, what: &str) -> Result<usize> {
    if t < 3.0 {
        return Err(Error::Degenerate(format!(
            "chain length {t:.0} < 3 for the {what} construction; increase the gap or decrease the target"
        )));
    }
    if t > 1e8 {
        return Err(Error::Degenerate(format!("chain length {t:.3e} is too large to materialise")));
    }
    Ok(t as usize)
}

/// Scaled gradient chain whose `ε`-stationary points need many queries.
pub fn build_eps_hard_instance<T: Real>(
    epsilon: f64,
    l1: f64,
    l2: f64,
    sigma1: f64,
    sigma2: f64,
    delta: f64,
) -> Result<ChainInstance<T>> {
    positive("epsilon", epsilon)?;
    positive("L1", l1)?;
    positive("L2", l2)?;
    positive("sigma1", sigma1)?;
    positive("sigma2", sigma2)?;
    positive("Delta", delta)?;
    let c = chain_constants(ChainKind::EpsChain);
    let gap0 = ChainKind::EpsChain.gap_per_link();
    let beta = (c.l0 * sigma2 / (c.l1 * sigma1)).min(l1 / (2.0 * epsilon * c.l1)).min((l2 / (2.0 * epsilon * c.l2)).sqrt());
    let alpha = 2.0 * epsilon / beta;
    let rho = (2.0 * epsilon * c.l0 / sigma1).powi(2).min(1.0);
    let t = check_length((delta * beta / (2.0 * gap0 * epsilon)).floor(), "gradient-chain")?;
    let k = noise_ratio(rho);
    let checks = vec![
        ConstraintCheck::ceiling("Delta", alpha * gap0 * t as f64, delta),
        ConstraintCheck::ceiling("L1", alpha * beta * beta * c.l1, l1),
        ConstraintCheck::ceiling("L2", alpha * beta.powi(3) * c.l2, l2),
        ConstraintCheck::floor("epsilon", alpha * beta / 2.0, epsilon),
        ConstraintCheck::ceiling("sigma1", alpha * beta * c.l0 * k, sigma1),
        ConstraintCheck::ceiling("sigma2", alpha * beta * beta * c.l1 * k, sigma2),
    ];
    let recipe = ScalingRecipe { target: Target::Epsilon(epsilon), alpha, beta, rho, t, constants: c, checks };
    Ok(ChainInstance {
        chain: ChainFunction::scaled(ChainKind::EpsChain, t, T::lit(alpha), T::lit(beta)),
        rho: T::lit(rho),
        recipe,
    })
}

/// Scaled curvature chain whose `γ`-second-order points need many queries.
///
/// The achieved gradient Lipschitz constant `5γℓ̄₁` is recorded but not
/// constrained; it is at most `L₁` whenever `γ ≤ L₁/(5ℓ̄₁)`.
pub fn build_gamma_hard_instance<T: Real>(gamma: f64, l2: f64, sigma2: f64, delta: f64) -> Result<ChainInstance<T>> {
    positive("gamma", gamma)?;
    positive("L2", l2)?;
    positive("sigma2", sigma2)?;
    positive("Delta", delta)?;
    let c = chain_constants(ChainKind::GammaChain);
    let gap0 = ChainKind::GammaChain.gap_per_link();
    let beta = l2 / (5.0 * c.l2 * gamma);
    let alpha = 5.0 * gamma / (beta * beta);
    let rho = (5.0 * c.l1 * gamma / sigma2).powi(2).min(1.0);
    let t = check_length((delta * beta * beta / (5.0 * gap0 * gamma)).floor(), "curvature-chain")?;
    let k = noise_ratio(rho);
    let checks = vec![
        ConstraintCheck::ceiling("Delta", alpha * gap0 * t as f64, delta),
        ConstraintCheck::ceiling("L2", alpha * beta.powi(3) * c.l2, l2),
        ConstraintCheck::floor("gamma", alpha * beta * beta / 2.0, gamma),
        ConstraintCheck::ceiling("sigma2", alpha * beta * beta * c.l1 * k, sigma2),
    ];
    let recipe = ScalingRecipe { target: Target::Gamma(gamma), alpha, beta, rho, t, constants: c, checks };
    Ok(ChainInstance {
        chain: ChainFunction::scaled(ChainKind::GammaChain, t, T::lit(alpha), T::lit(beta)),
        rho: T::lit(rho),
        recipe,
    })
}
