//! Positive linear transport systems on `[0, 1]` with boundary feedback and
//! delayed boundary conditions.
//!
//! The system under study is
//!
//! ```text
//! ∂y/∂t + D ∂y/∂x = 0,            0 < x < 1, t ≥ 0
//! y(0, t) = K y(1, t)                      (feedback)
//! y(0, t) = ∫₀¹ ∫₋₁⁰ dμ(θ) y(x, t+θ) dx     (delayed feedback)
//! ```
//!
//! with `D = diag(d_1, …, d_n)`, `d_i > 0`. For nonnegative `K` (or `μ`) the
//! closed loop is a positive semigroup and it is uniformly exponentially stable
//! exactly when the spectral radius of the boundary loop gain at `λ = 0` is
//! below one. This crate evaluates those criteria and checks them against
//! trajectories from two independent solvers:
//!
//! * [`model`]: system description, grid fields, history buffers, reports.
//! * [`operators`]: Dirichlet lifts and transfer functions in closed form.
//! * [`analysis`]: spectral radii, stability verdicts, characteristic-root
//!   counting, discrete resolvent checks and decay-rate fits.
//! * [`solver`]: an exact method-of-characteristics solver and a first-order
//!   upwind finite-volume solver.
//! * [`cli`]: configuration files and the `analyze`/`simulate`/`spectrum`/`verify`
//!   commands behind the `hyperpos` binary.
//!
//! ```
//! use hyperpos::analysis::stability_hyperbolic;
//! use hyperpos::model::{SystemSpec, Verdict};
//!
//! let spec = SystemSpec::scalar(1.0, 0.5);
//! let report = stability_hyperbolic(&spec).unwrap();
//! assert_eq!(report.verdict, Verdict::UniformlyExponentiallyStable);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod model;
pub mod operators;
pub mod scenarios;
pub mod solver;

pub use error::{Error, Result};
