//! Energy-balanced data splitting.
//!
//! Partitions a tabular dataset into statistically similar disjoint subsets
//! by greedily carving nearest-neighbor groups, so that every part resembles
//! the whole under the energy-distance criterion. One run produces a pair of
//! "twins" (e.g. a training and a testing set, or a compressed subsample);
//! chained or single runs produce k-way "multiplets" for cross-validation
//! folds or divide-and-conquer blocks.
//!
//! The crate also ships the energy-distance estimators used to score splits,
//! a masked nearest-neighbor index (logical deletion without restructuring),
//! seeded synthetic data generators, and brute-force oracles that the fast
//! paths are verified against.
//!
//! Determinism is a contract throughout: fixed inputs and seeds produce
//! byte-identical results regardless of thread count.

mod dataset;
mod energy;
mod error;
mod masked_index;
mod multiplet;
mod oracle;
mod synthetic;
mod twinning;

pub use dataset::{ConstantColumnPolicy, Dataset, RawTable};
pub use energy::{
    energy_between, energy_full, energy_plot_metric, energy_report, verify_proposition1,
    EnergyReport, Prop1Check,
};
pub use error::{Result, TwinError};
pub use masked_index::{MaskedIndex, QueryStats};
pub use multiplet::{
    max_energy, multiplet_s1, multiplet_s1_with_ratios, multiplet_s2, multiplet_s3,
    MultipletResult, MultipletStrategy,
};
pub use oracle::{
    exhaustive_best_subset, exhaustive_subset_energies, linear_scan_nn, random_partition,
    random_subset, rank_sum_one_sided_p, ENUMERATION_GUARD,
};
pub use synthetic::{generate_mvn, generate_parabola, MvnSpec, MVN_RHO};
pub use twinning::{select_start, twin, twin_compress, StartPolicy, TwinParams, TwinResult};
