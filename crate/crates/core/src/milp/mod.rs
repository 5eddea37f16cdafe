//! MILP formulations of MSD- and MWSD-constrained portfolio choice.

mod bigm;
mod build;
mod certify;
pub mod export;
mod external;
mod model;
mod solve;

pub use bigm::{big_m, BigMFamily, SAFETY_MARGIN};
pub use build::{build_m1, build_m2, AssetPanel, BuildOptions};
pub use certify::{certify, certify_weights, CERTIFY_TOLERANCE};
pub use model::{BigMValues, Constraint, Family, MilpModel, ModelMetadata, Sense, VarKind, Variable};
pub use solve::{solve, Limits, NativeAdapter, SolveOutcome, SolveStats, SolveStatus, SolverAdapter};
pub use export::{export_lp, export_mps};
pub use external::{parse_cbc_solution, parse_highs_solution, ExternalAdapter, ExternalKind, SolutionFile, SOLVER_BIN_ENV};
