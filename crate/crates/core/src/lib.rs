//! Adaptive space-time finite elements for the regularized stochastic total
//! variation flow on the unit square.
//!
//! The building blocks are a newest-vertex-bisection [`mesh`], P1 elements
//! ([`fem`]), the noise model ([`noise`]), the implicit step ([`solver`]),
//! residual indicators ([`estimators`]) and the marking/step-size rules
//! ([`adapt`]). [`driver`] runs sample paths and Monte Carlo ensembles.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adapt;
pub mod config;
pub mod driver;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod noise;
pub mod quadrature;
pub mod solver;
pub mod validation;

pub use config::{DataPreset, RunConfig, Scheme};
pub use driver::{run_mc, run_path, Ensemble, PathLog};
pub use error::{Error, Result};
pub use estimators::IndicatorRecord;
pub use exec::Execution;
pub use fem::FeFunction;
pub use mesh::Mesh;
