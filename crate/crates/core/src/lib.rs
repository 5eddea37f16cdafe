//! Markowitz and weighted Markowitz stochastic dominance: discrete checks,
//! MILP portfolio formulations, a native branch-and-bound solver, data
//! loading and the rolling-window study driver.

pub mod data;
pub mod distribution;
pub mod dominance;
pub mod error;
pub mod experiment;
pub mod milp;
pub mod solver;

pub use distribution::{canonicalize, CanonicalPair, DiscreteReturnDistribution, SupportBounds};
pub use dominance::{
    check, check_fsd, check_msd, check_mwsd, compute_t_bounds, msd_witness, Criterion,
    DominanceSpec, DominanceVerdict, Violation,
};
pub use error::{Error, Result};
pub use milp::{
    build_m1, build_m2, certify, certify_weights, export_lp, export_mps, solve, AssetPanel, BuildOptions,
    ExternalAdapter, ExternalKind, Limits, MilpModel, NativeAdapter, SolveOutcome, SolveStatus, SolverAdapter,
};
pub use data::{
    lower_median, read_state_table, read_values, EstimationWindow, ReferenceMode, ReturnSeries, WindowSet, YearMonth,
};
pub use experiment::{emit_outputs, run_study, StudyConfig, StudySummary, WindowResult};
