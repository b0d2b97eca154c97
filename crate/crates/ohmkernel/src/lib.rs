//! Effective-resistance graph kernels.
//!
//! Feature vectors are built from pairwise effective resistances of a graph
//! (all pairs, or a `ceil(sqrt(n))` random sample), compared with an RBF
//! kernel, and fed to a precomputed-Gram SVM for classification.

pub mod graph;
pub mod kernel;
pub mod resistance;
pub mod rng;
pub mod svm;
pub mod tudata;

pub use graph::{Graph, LaplacianMatrix};
pub use kernel::{FeatureMode, FeatureVector, GramMatrix};
pub use resistance::PseudoinverseMatrix;
pub use svm::{BenchmarkReport, SvmModel};
pub use tudata::Dataset;
