//! Inner solvers shared by the second-order drivers.

pub mod cubic;
pub mod curvature;
pub mod oja;

pub use cubic::{solve_cubic_tr, CubicModel, CubicSolution, Secular};
pub use curvature::{curvature_step, exact_curvature_direction, signed_curvature_step};
pub use oja::{oja_plan, oja_search, CurvatureCertificate, OjaPlan};
