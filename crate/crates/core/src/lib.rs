//! Hierarchical correlation block models and the recovery of their nested
//! clusters from sampled returns.
//!
//! The pipeline is: build a block-structured correlation matrix
//! ([`model`]), draw Gaussian or Student-t returns from it ([`sampler`]),
//! estimate correlations ([`estimators`]), map them to distances
//! `d = (1 - rho) / 2` and cluster ([`clustering`]). [`separability`] holds
//! the deterministic recovery conditions and error budgets, and
//! [`experiments`] runs the Monte Carlo recovery studies.

pub mod clustering;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod model;
pub mod par;
pub mod partition;
pub mod sampler;
pub mod separability;

pub use clustering::{Algorithm, AlgorithmClass, Dendrogram, Linkage, Merge};
pub use error::{Error, Result};
pub use estimators::{correlation_matrix, Coefficient};
pub use model::{
    benchmark_hierarchy, build_correlation, correlation_to_distance, BlockSpec, CorrelationMatrix,
    DistanceMatrix, Hierarchy,
};
pub use par::Execution;
pub use partition::Partition;
pub use sampler::{Model, SampleMatrix, Sampler};
