//! Shared fixtures for the criterion benchmarks.

use jcat_core::ingest::synthesize_dataset;
use jcat_core::preprocess::{ImputePolicy, Preprocessor};
use jcat_core::FeatureMatrix;

/// Scaled feature matrix for a synthetic table of `n` journals.
pub fn scaled_fixture(n: usize, seed: u64) -> FeatureMatrix {
    let ds = synthesize_dataset(n, seed).expect("n >= 9");
    Preprocessor::fit(&ds.table, 2021, ImputePolicy::Fail)
        .expect("synthetic data is complete")
        .scaled
}
