//! Compressed sensing of non-negative sparse signals with perturbed
//! minimal-expansion measurement matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: pivoted QR, least squares, rank and null spaces.
//! * [`lp`]: a dense two-phase simplex solver.
//! * [`graph`]: left-regular bipartite graphs, expansion checks and the
//!   column-sum preserving perturbation that turns an adjacency matrix into
//!   a [`MeasurementMatrix`].
//! * [`nullspace`]: complete (Kruskal) rank and recoverability certificates.
//! * [`recovery`]: ℓ1 minimization, reverse expansion recovery and its
//!   noise-tolerant variant.
//! * [`thresholds`]: strong and weak sparsity thresholds.

pub mod error;
pub mod graph;
pub mod linalg;
pub mod lp;
pub mod nullspace;
pub mod recovery;
pub mod rng;
pub mod thresholds;

pub use error::{Error, Result};
pub use graph::{BipartiteGraph, MeasurementMatrix};
pub use linalg::DenseMatrix;
pub use recovery::{NoiseModel, RecoveryReport, SparseSignal};
pub use thresholds::ThresholdParams;
