//! Time-domain solvers.
//!
//! [`moc`] follows characteristics exactly and re-injects the boundary
//! feedback from a recorded trace; [`fv`] is an independent first-order upwind
//! finite-volume scheme used to cross-check it.

pub mod compare;
pub mod fv;
pub mod moc;

pub use fv::{cfl_dt, solve_fv, solve_fv_strided, step_upwind, FvSolution, FvState};
pub use moc::{
    solve_moc, solve_moc_delay, solve_moc_delay_strided, solve_moc_strided, BoundaryTrace, Solution,
};

use crate::model::Field;

/// `(t, l2, linf)` rows of a field trajectory.
pub fn norm_series(trajectory: &[(f64, Field)]) -> Vec<(f64, f64, f64)> {
    trajectory
        .iter()
        .map(|(t, f)| (*t, f.l2_norm(), f.linf_norm()))
        .collect()
}
