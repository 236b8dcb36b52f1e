//! Stochastic nonconvex optimisation with gradient, Hessian-vector and
//! Hessian oracles.
//!
//! The library is generic over the scalar type through [`Real`]; the
//! `f64` aliases at the crate root cover the common case.

// Negated comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod hard;
pub mod linalg;
pub mod multipoint;
pub mod objective;
pub mod oracle;
pub mod rng;
pub mod rvr;
pub mod scalar;
pub mod solvers;
pub mod subproblems;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = linalg::SymMatrix<f64>;
pub type Instance = oracle::ProblemInstance<f64>;
pub type Regularity = oracle::RegularityParams<f64>;
pub type Noise = oracle::NoiseParams<f64>;
pub type Chain = hard::ChainFunction<f64>;
pub type ChainOracle = hard::ZeroChainOracle<f64>;

pub type Params = solvers::SolverParams<f64>;
pub type Outcome = solvers::RunResult<f64>;
