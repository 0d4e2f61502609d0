//! Domain types shared by the operators, the analysis routines and the solvers.

mod field;
mod history;
mod report;
mod system;

pub use field::Field;
pub(crate) use history::ring_len;
pub use history::HistoryBuffer;
pub use report::{Criterion, StabilityReport, Verdict, DEFAULT_TOL_MARGINAL};
pub use system::{
    positivity_violations, validate_system, Atom, DelayMeasure, PiecewiseDensity, SystemSpec,
    ValidationResult, Violation,
};
