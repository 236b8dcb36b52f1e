//! Lower-bound constructions: chain functions, zero-chain oracles, scaling
//! recipes and a zero-respecting simulation.

pub mod chain;
pub mod components;
pub mod constants;
pub mod recipes;
pub mod runner;
pub mod zero_chain;

pub use chain::{prog, ChainEval, ChainFunction, ChainKind};
pub use components::{lambda_fn, phi, psi};
pub use constants::{chain_constants, ChainConstants};
pub use recipes::{build_eps_hard_instance, build_gamma_hard_instance, ChainInstance, ConstraintCheck, ScalingRecipe, Target};
pub use runner::{progress_deadline, zero_respecting_run, ProgressTrajectory};
pub use zero_chain::{ChainAnswer, ChainDerivative, RowScaledTridiagonal, ZeroChainOracle};
