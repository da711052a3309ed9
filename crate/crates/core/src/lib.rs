//! Kantorovich semi-distances, Dobrushin coefficients and drift/contraction
//! certificates for discretized Markov kernels.
//!
//! The crate is organised bottom-up:
//!
//! * [`measures`]: grids, probability vectors and Lyapunov weight functions.
//! * [`semidistance`]: pairwise cost functions (discrete metric, weighted
//!   costs, interpolated and boundary metrics).
//! * [`transport`]: exact optimal transport between discrete measures.
//! * [`kernels`]: row-stochastic matrices and the example model families.
//! * [`certify`]: numerical drift, minorization and local contraction checks.
//! * [`contraction`]: Dobrushin coefficients, explicit bounds, decay curves,
//!   invariant measures and the fixed-point application.
//!
//! Every quantity is exact for the discretized chain. Suprema over the
//! continuum are approximated by grid maxima, which are lower bounds.

pub mod certify;
pub mod contraction;
pub mod error;
pub mod kernels;
pub mod measures;
pub mod semidistance;
pub mod transport;

pub use error::{Error, Result};
pub use kernels::KernelMatrix;
pub use measures::{DiscreteMeasure, DomainTag, Grid, WeightFunction};
pub use semidistance::CostFunction;

/// Version of this crate, recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
