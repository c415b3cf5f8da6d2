//! Matrix-free second-order methods for l1-regularized composite minimization
//!
//! This crate solves `min_x f(x) + lambda * ||x||_1` where `f` is twice
//! continuously differentiable and possibly nonconvex, accessed only through
//! value, gradient, and Hessian-vector-product callbacks. Two solvers are
//! provided:
//!
//! * [`hpgncm::hpgncm_solve`] — a hybrid proximal-gradient / negative-curvature
//!   method that certifies a strong* approximate second-order stationary point,
//! * [`pgn2cm::pgn2cm_solve`] — a proximal-gradient / Newton-CG method with
//!   negative-curvature steps that certifies a weak approximate second-order
//!   stationary point.
//!
//! Both use a capped conjugate-gradient solver ([`capped_cg`]) for regularized
//! Newton systems and a randomized Lanczos minimum-eigenvalue oracle ([`meo`])
//! for curvature certificates. The [`stationarity`] module holds the residuals,
//! index partitions, and stationary-point checkers the solvers are built from,
//! and [`problems`] ships built-in test problems (a separable quartic toy
//! instance, Student's t-regression over subsampled DCT measurements, and
//! random quadratic-plus-l1 instances).
//!
//! The crate is `no_std` + `alloc`; the default `std` feature only adds
//! wall-clock timestamps to iteration traces.

#![no_std]
// `!(x > 0.0)`-style guards are deliberate: unlike `x <= 0.0` they also
// reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(any(test, feature = "std"))]
extern crate std;

extern crate alloc;

pub mod capped_cg;
pub mod config;
pub mod error;
mod fmath;
pub mod hpgncm;
pub mod linalg;
pub mod meo;
pub mod oracle;
pub mod pgn2cm;
pub mod problems;
mod solver_util;
pub mod stationarity;
pub mod trace;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use oracle::{CompositeProblem, SmoothOracle};
pub use trace::{IterationTrace, OpCounters, SolveReport, SolveStatus};
