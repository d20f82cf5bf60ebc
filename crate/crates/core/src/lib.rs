//! Journal categorization pipeline.
//!
//! A bibliometric journal table is cleaned and scaled ([`preprocess`]),
//! clustered into three quality categories with Gower-distance k-medoids
//! ([`cluster`]), reduced with three feature-selection methods ([`featsel`]),
//! and used to train and evaluate a suite of classifiers ([`classify`],
//! [`evaluate`]). Reports are rendered by [`report`].

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod classify;
pub mod cluster;
pub mod evaluate;
pub mod featsel;
pub mod ingest;
pub mod matrix;
pub mod preprocess;
pub mod report;
pub mod rng;


pub use classify::{ClassifierKind, ClassifierSpec, TrainedModel};
pub use cluster::{Category, CategoryMap, ClusterAssignment, DistanceMatrix};
pub use evaluate::{ConfusionMatrix, EvalReport, ExperimentConfig};
pub use featsel::{FeatureScore, FeatureSubset};
pub use ingest::{JournalRecord, RawTable};
pub use matrix::Matrix;
pub use preprocess::{EncodingMap, FeatureMatrix, ScaleParams};
