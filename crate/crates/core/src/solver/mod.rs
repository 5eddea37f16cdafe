//! Native LP and MILP solving.

pub mod bnb;
pub mod lp;

pub use bnb::{solve_mip, BnbOptions, MipProblem, MipResult, MipStatus, RoundingHint};
pub use lp::{solve_lp, LpProblem, LpStatus, Simplex};
