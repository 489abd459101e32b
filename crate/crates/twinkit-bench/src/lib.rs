//! Shared fixtures for the criterion benchmarks.

use twinkit_core::{generate_mvn, ConstantColumnPolicy, Dataset, MvnSpec};

/// Standardized multivariate-normal dataset with the benchmark covariance.
pub fn mvn_dataset(n_rows: usize, dim: usize, seed: u64) -> Dataset {
    generate_mvn(&MvnSpec { n_rows, dim, seed })
        .expect("generator parameters are valid")
        .standardize(ConstantColumnPolicy::Reject)
        .expect("MVN draws are never constant")
}
