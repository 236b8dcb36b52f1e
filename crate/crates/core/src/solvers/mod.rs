//! Top-level optimisation algorithms and their parameter schedules.

mod algorithms;
pub mod params;
pub mod run;

pub use algorithms::{
    cubic_rvr, cubic_rvr_with, sgd_baseline, sgd_baseline_with, sgd_hvp_rvr, sgd_hvp_rvr_with, sosp_cubic,
    sosp_cubic_with, sosp_hvp, sosp_hvp_with,
};
pub use params::{
    log_dim, CubicRvrParams, Overrides, ParamMode, SgdRvrParams, SolverParams, SospCubicParams, SospHvpParams,
};
pub use run::{
    Diagnostics, FirstPassage, PassageRule, RunOptions, RunResult, TrajectoryPoint, DEFAULT_BUDGET_CAP,
    MAX_TRAJECTORY_POINTS,
};
