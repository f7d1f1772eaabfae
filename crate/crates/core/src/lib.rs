//! Robust binary classification by graph-signal restoration on signed
//! similarity graphs.
//!
//! The crate is split into:
//!
//! - [`graph`]: kNN similarity graphs, negative-edge insertion and Laplacians.
//! - [`spectral`]: dense eigen oracle, lower bounds on the smallest eigenvalue,
//!   PSD perturbations and the recursive Schur-complement bound.
//! - [`solver`]: priors, conjugate gradient, IRLS and the reject-option rule.
//! - [`pipeline`]: the classifier variants assembled from the pieces above.
//! - [`harness`]: dataset I/O, label noise, synthetic data and experiment sweeps.

pub mod error;
pub mod graph;
pub mod harness;
pub mod pipeline;
pub mod solver;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{FeatureSet, LaplacianBundle, PartialLabels, SignedGraph};
pub use sparse::{SparseSym, SymMatrix, SymOperator};
