//! Optimal quasi-Monte Carlo point sets on the two-dimensional torus.
//!
//! The worst-case error of an equal-weight cubature rule in the periodic
//! Sobolev space of dominating mixed smoothness one is minimized by
//! splitting the configuration space into cells on which both coordinate
//! orderings are fixed. On each cell the objective is a convex quartic;
//! its minimum is found by exact alternating block solves and bounded from
//! below, in exact rational arithmetic, through Wolfe duality.
//!
//! Modules, bottom up:
//!
//! - [`torus`]: points, point sets and torus symmetries
//! - [`kernel`]: kernels, worst-case error, periodic L2-discrepancy
//! - [`lattice`]: rank-1 and Fibonacci lattices
//! - [`perm`]: cell indices and the semi-canonical reduction
//! - [`optimize`]: per-cell alternating minimization
//! - [`certify`]: exact dual lower bounds and the certification sweep
//! - [`driver`]: search, certification and table drivers behind the CLI

pub mod certify;
pub mod cholesky;
pub mod driver;
pub mod error;
pub mod kernel;
pub mod lattice;
pub mod optimize;
pub mod perm;
pub mod pointfile;
pub mod scalar;
pub mod torus;

pub use error::{Error, Result};
pub use kernel::Gamma;
pub use perm::Permutation;
pub use scalar::{Rational, Scalar, ScalarMode};
pub use torus::{PointSet, TorusPoint, TorusSymmetry};
