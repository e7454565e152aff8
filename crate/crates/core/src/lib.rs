//! Core algorithms for recommending extract-class refactorings of a god class.
//!
//! The crate is `no_std` and needs only `alloc`. It works on an already
//! extracted [`ClassFacts`] model: structural similarity between methods,
//! semantic method vectors (LSI, LDA or imported vectors), a variational
//! graph autoencoder over the method graph, OPTICS clustering into proposed
//! sub-classes, and LCOM/MPC metrics for the resulting split.
//!
//! Parsing Java, file formats and the command line live in the `classplit`
//! crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cluster;
pub mod error;
pub mod facts;
pub mod linalg;
mod math;
pub mod metrics;
pub mod pipeline;
pub mod semvec;
pub mod structsim;
pub mod textprep;
pub mod vgae;

pub use cluster::{ClusterConfig, Partition, PartitionWarning};
pub use error::{Error, Result};
pub use facts::{ClassFacts, MethodFacts, MethodId};
pub use linalg::Matrix;
pub use metrics::MetricsReport;
pub use pipeline::{Combiner, Embedding, ModelSpec};
pub use semvec::{FeatureMatrix, FeatureSource};
pub use structsim::{ClassGraph, SimilarityKind, SimilarityMatrix};
pub use textprep::BagOfWords;
pub use vgae::{LatentMatrix, VgaeConfig, VgaeModel};
