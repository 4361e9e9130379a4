//! LP solving contracts: the simplex engine, column generation for the
//! welfare LP and its lexicographic dual.

pub mod simplex;
pub mod swm_lp;

pub use simplex::{solve_packing_lp, Cmp, LinearProgram, LpSolution, Sense};
pub use swm_lp::{
    complementary_slackness, solve_dual_lexi, solve_restricted, solve_swm_lp, CapacityVector, Column, CsReport,
    DualSolution, FractionalAssignment, SwmLpSolution,
};
