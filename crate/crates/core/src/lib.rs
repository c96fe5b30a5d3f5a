//! Directed graph Fourier transforms built from orthonormal bases whose
//! columns are ordered by directed variation and spread as evenly as
//! possible over `[0, f_max]`.
//!
//! Three ways to build a basis are provided: a feasible descent on the
//! Stiefel manifold ([`stiefel`]), a greedy selection over signed Laplacian
//! eigenvectors ([`greedy`]), and plain eigenbases of the undirected or
//! Chung Laplacian for comparison ([`spectral`]). [`transform`] applies the
//! resulting transform to signals.

pub mod error;
pub mod graph;
pub mod variation;
pub mod spectral;
pub mod stiefel;
pub mod greedy;
pub mod transform;
pub mod generators;
pub mod text;

pub use error::{Error, ErrorClass, Result};
pub use graph::{DenseMatrix, DiGraph, Edge, GraphSignal};
pub use greedy::GreedySelection;
pub use spectral::{EigenDecomposition, FmaxKind, FmaxResult};
pub use stiefel::{OptimizerConfig, OrthonormalBasis, SolverTrace};
pub use transform::{DenoiseReport, FilterSpec, SpectralCoefficients};
pub use variation::{directed_variation, FrequencyProfile};
