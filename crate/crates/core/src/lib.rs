//! Smooth-and-match estimation of ODE parameters.
//!
//! Noisy trajectory data are smoothed with a Priestley-Chao kernel
//! estimator; the parameter estimate minimizes the weighted integrated
//! mismatch between the smoothed derivative and the right-hand side
//! evaluated on the smoothed states. No ODE is integrated in the process.
//!
//! * [`ode`] systems, Jacobians, and a reference RK4 integrator
//! * [`smoothing`] kernels, weight function, Priestley-Chao estimator
//! * [`estimator`] criterion, linear and derivative-free solvers, OLS baseline
//! * [`experiments`] simulation and Monte Carlo rate studies

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod estimator;
pub mod experiments;
pub mod ode;
pub mod quadrature;
pub mod smoothing;

pub use error::{Error, Result};
