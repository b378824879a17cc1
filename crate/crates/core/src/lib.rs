//! Recovery of planted dense clusters by convex "low rank + sparse"
//! decomposition of a graph's adjacency matrix.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] draws graphs from the cluster model and handles the
//!   edge-list file format.
//! * [`matops`] holds the dense symmetric kernels (SVT, projections, norms).
//! * [`solvers`] solves the blind and the size-informed decomposition
//!   programs by ADMM.
//! * [`certificate`] builds the dual certificate and perturbation functionals
//!   that explain when the planted solution is optimal.
//! * [`recovery`] rounds a solution back to clusters and scores it.
//! * [`harness`] runs phase-transition sweeps and reads/writes the text
//!   formats used by the command line tool.

pub mod certificate;
pub mod error;
pub mod harness;
pub mod matops;
pub mod model;
pub mod recovery;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use matops::SymMatrix;
pub use model::{ClusterLayout, CoordSet, ModelParams, PlantedGraph};
pub use recovery::RecoveryOutcome;
pub use rng::{derive_seed, rng_from_seed, ExperimentRng};
pub use solvers::{Decomposition, LambdaMode, Method, SolverConfig};
