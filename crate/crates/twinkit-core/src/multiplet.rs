//! k-way splits ("multiplets") built from chained or single twinning runs,
//! for cross-validation folds and divide-and-conquer blocks.
//!
//! Three strategies:
//!
//! * `S1` - peel folds off one at a time: twin with `r = k` to get fold 1,
//!   then `r = k - 1` on the remainder, and so on; the last remainder is
//!   fold `k`.
//! * `S2` - recursive halving with `r = 2`; requires `k` to be a power of
//!   two. Folds come out in left-to-right recursion order.
//! * `S3` - a single twinning run with `r = k`; the anchor of every carved
//!   subset goes to fold 1, its nearest neighbor to fold 2, and so on.
//!
//! Sub-runs re-apply the caller's start policy on their remainder. A
//! `Random(seed)` start re-seeds each run with `seed + run ordinal`, counted
//! in execution order, so whole strategies are reproducible from one seed.

use crate::dataset::Dataset;
use crate::energy::energy_plot_metric;
use crate::error::{Result, TwinError};
use crate::twinning::{twin_active, StartPolicy, TwinParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultipletStrategy {
    S1,
    S2,
    S3,
}

impl MultipletStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            MultipletStrategy::S1 => "s1",
            MultipletStrategy::S2 => "s2",
            MultipletStrategy::S3 => "s3",
        }
    }
}

/// A k-way partition of the dataset rows with per-fold quality scores.
#[derive(Debug, Clone)]
pub struct MultipletResult {
    /// Disjoint row-index sets covering all rows, each ascending.
    pub folds: Vec<Vec<usize>>,
    pub strategy: MultipletStrategy,
    /// `energy_plot_metric` of each fold against the full dataset.
    pub per_fold_energy: Vec<f64>,
    /// Largest per-fold energy; low means every fold resembles the data.
    pub max_energy: f64,
}

fn derived_start(start: StartPolicy, run_ordinal: u64) -> StartPolicy {
    match start {
        StartPolicy::Random(seed) => StartPolicy::Random(seed.wrapping_add(run_ordinal)),
        other => other,
    }
}

fn check_k(k: usize, n_rows: usize) -> Result<()> {
    if k < 2 || k > n_rows {
        return Err(TwinError::FoldCountOutOfRange { k, rows: n_rows });
    }
    Ok(())
}

fn score(
    data: &Dataset,
    strategy: MultipletStrategy,
    folds: Vec<Vec<usize>>,
) -> Result<MultipletResult> {
    let mut per_fold_energy = Vec::with_capacity(folds.len());
    for fold in &folds {
        per_fold_energy.push(energy_plot_metric(fold, data)?);
    }
    let max_energy = per_fold_energy
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MultipletResult {
        folds,
        strategy,
        per_fold_energy,
        max_energy,
    })
}

/// Peeling strategy: `k - 1` twinning runs over a shrinking remainder.
pub fn multiplet_s1(data: &Dataset, k: usize, start: StartPolicy) -> Result<MultipletResult> {
    check_k(k, data.n_rows())?;
    let ratios: Vec<usize> = (2..=k).rev().collect();
    let folds = peel_folds(data, &ratios, start)?;
    score(data, MultipletStrategy::S1, folds)
}

/// Peeling with caller-chosen ratios, one per run; produces
/// `ratios.len() + 1` folds of unequal sizes. `multiplet_s1` is the special
/// case `ratios = [k, k-1, ..., 2]`.
pub fn multiplet_s1_with_ratios(
    data: &Dataset,
    ratios: &[usize],
    start: StartPolicy,
) -> Result<MultipletResult> {
    if ratios.is_empty() {
        return Err(TwinError::FoldCountOutOfRange {
            k: 1,
            rows: data.n_rows(),
        });
    }
    let folds = peel_folds(data, ratios, start)?;
    score(data, MultipletStrategy::S1, folds)
}

fn peel_folds(data: &Dataset, ratios: &[usize], start: StartPolicy) -> Result<Vec<Vec<usize>>> {
    let mut remaining: Vec<usize> = (0..data.n_rows()).collect();
    let mut folds = Vec::with_capacity(ratios.len() + 1);
    for (run, &r) in ratios.iter().enumerate() {
        let params = TwinParams {
            r,
            start: derived_start(start, run as u64),
        };
        let result = twin_active(data, &remaining, &params)?;
        let mut fold = result.d1;
        fold.sort_unstable();
        folds.push(fold);
        remaining = result.d2;
        remaining.sort_unstable();
    }
    assert!(!remaining.is_empty(), "peeling consumed every row");
    folds.push(remaining);
    Ok(folds)
}

/// Recursive halving; `k` must be a power of two.
pub fn multiplet_s2(data: &Dataset, k: usize, start: StartPolicy) -> Result<MultipletResult> {
    check_k(k, data.n_rows())?;
    if !k.is_power_of_two() {
        return Err(TwinError::NotPowerOfTwo { k });
    }
    let levels = k.trailing_zeros();
    let active: Vec<usize> = (0..data.n_rows()).collect();
    let mut folds = Vec::with_capacity(k);
    let mut run_counter = 0u64;
    halve(data, active, levels, start, &mut run_counter, &mut folds)?;
    score(data, MultipletStrategy::S2, folds)
}

fn halve(
    data: &Dataset,
    active: Vec<usize>,
    levels: u32,
    start: StartPolicy,
    run_counter: &mut u64,
    folds: &mut Vec<Vec<usize>>,
) -> Result<()> {
    if levels == 0 {
        folds.push(active);
        return Ok(());
    }
    let params = TwinParams {
        r: 2,
        start: derived_start(start, *run_counter),
    };
    *run_counter += 1;
    let result = twin_active(data, &active, &params)?;
    let mut left = result.d1;
    left.sort_unstable();
    let mut right = result.d2;
    right.sort_unstable();
    halve(data, left, levels - 1, start, run_counter, folds)?;
    halve(data, right, levels - 1, start, run_counter, folds)
}

/// Single-run strategy: carve with `r = k` and deal each subset's members
/// round-robin into the folds (anchor to fold 1, j-th neighbor to fold
/// j+1). A short final subset fills folds 1..s and leaves the rest alone.
pub fn multiplet_s3(data: &Dataset, k: usize, start: StartPolicy) -> Result<MultipletResult> {
    check_k(k, data.n_rows())?;
    let params = TwinParams { r: k, start };
    let active: Vec<usize> = (0..data.n_rows()).collect();
    let result = twin_active(data, &active, &params)?;
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for subset in &result.subsets {
        for (j, &row) in subset.iter().enumerate() {
            folds[j].push(row);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    score(data, MultipletStrategy::S3, folds)
}

/// Largest `energy_plot_metric` over the folds, after checking they
/// partition the dataset rows.
pub fn max_energy(folds: &[Vec<usize>], data: &Dataset) -> Result<f64> {
    let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
    all.sort_unstable();
    if all.len() != data.n_rows() || all.iter().enumerate().any(|(i, &row)| i != row) {
        return Err(TwinError::NotAPartition);
    }
    let mut max = f64::NEG_INFINITY;
    for fold in folds {
        max = max.max(energy_plot_metric(fold, data)?);
    }
    Ok(max)
}
