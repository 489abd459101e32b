//! Desk-scale verification tools: brute-force references the fast paths are
//! checked against, random-split baselines, and a rank-sum test for the
//! statistical comparisons.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::energy::energy_full;
use crate::error::{Result, TwinError};

/// Subsets an exhaustive search is allowed to enumerate.
pub const ENUMERATION_GUARD: u128 = 1_000_000;

/// Brute-force k-nearest-neighbor search honoring a mask, with the same
/// `(distance, row index)` ordering as [`crate::MaskedIndex`]. `masked[i]`
/// true means row `i` is excluded.
pub fn linear_scan_nn(
    data: &Dataset,
    masked: &[bool],
    query: &[f64],
    k: usize,
) -> Result<Vec<(usize, f64)>> {
    if query.len() != data.n_cols() {
        return Err(TwinError::DimensionMismatch {
            expected: data.n_cols(),
            found: query.len(),
        });
    }
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for i in 0..data.n_rows() {
        if masked.get(i).copied().unwrap_or(false) {
            continue;
        }
        let mut d2 = 0.0;
        for (x, y) in data.row(i).iter().zip(query) {
            let d = x - y;
            d2 += d * d;
        }
        candidates.push((d2, i));
    }
    if candidates.len() < k {
        return Err(TwinError::NotEnoughUnmasked {
            requested: k,
            available: candidates.len(),
        });
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(candidates
        .into_iter()
        .take(k)
        .map(|(d2, i)| (i, d2.sqrt()))
        .collect())
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    result
}

/// Calls `f` with every size-`n` subset of `0..n_rows`, in lexicographic
/// order.
fn for_each_subset(n_rows: usize, n: usize, mut f: impl FnMut(&[usize])) {
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        f(&current);
        // Advance to the next combination.
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            if current[pos] != n_rows - n + pos {
                break;
            }
            if pos == 0 {
                return;
            }
        }
        if current[pos] == n_rows - n + pos {
            return;
        }
        current[pos] += 1;
        for q in pos + 1..n {
            current[q] = current[q - 1] + 1;
        }
    }
}

/// Searches every size-`n` subset for the one minimizing [`energy_full`];
/// ties resolve to the lexicographically smallest index set. Guarded to at
/// most [`ENUMERATION_GUARD`] candidates.
pub fn exhaustive_best_subset(data: &Dataset, n: usize) -> Result<(Vec<usize>, f64)> {
    let n_rows = data.n_rows();
    if n == 0 {
        return Err(TwinError::EmptySubset);
    }
    if n >= n_rows {
        return Err(TwinError::SubsetIsWholeDataset);
    }
    let combinations = binomial(n_rows, n);
    if combinations > ENUMERATION_GUARD {
        return Err(TwinError::EnumerationGuard {
            combinations,
            guard: ENUMERATION_GUARD,
        });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut failure: Option<TwinError> = None;
    for_each_subset(n_rows, n, |subset| {
        if failure.is_some() {
            return;
        }
        match energy_full(subset, data) {
            // Lexicographic enumeration plus strict < keeps the first, i.e.
            // lexicographically smallest, minimizer.
            Ok(e) => {
                if best.as_ref().is_none_or(|(_, b)| e < *b) {
                    best = Some((subset.to_vec(), e));
                }
            }
            Err(err) => failure = Some(err),
        }
    });
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(best.expect("at least one subset enumerated"))
}

/// [`energy_full`] of every size-`n` subset, in lexicographic subset order.
/// Same guard as [`exhaustive_best_subset`].
pub fn exhaustive_subset_energies(data: &Dataset, n: usize) -> Result<Vec<f64>> {
    let n_rows = data.n_rows();
    if n == 0 {
        return Err(TwinError::EmptySubset);
    }
    if n >= n_rows {
        return Err(TwinError::SubsetIsWholeDataset);
    }
    let combinations = binomial(n_rows, n);
    if combinations > ENUMERATION_GUARD {
        return Err(TwinError::EnumerationGuard {
            combinations,
            guard: ENUMERATION_GUARD,
        });
    }
    let mut energies = Vec::with_capacity(combinations as usize);
    let mut failure: Option<TwinError> = None;
    for_each_subset(n_rows, n, |subset| {
        if failure.is_some() {
            return;
        }
        match energy_full(subset, data) {
            Ok(e) => energies.push(e),
            Err(err) => failure = Some(err),
        }
    });
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(energies)
}

/// Seeded uniform random subset of `size` rows, ascending. Partial
/// Fisher-Yates over `0..n_rows` with a ChaCha8 generator.
pub fn random_subset(n_rows: usize, size: usize, seed: u64) -> Vec<usize> {
    assert!(size <= n_rows, "subset larger than the dataset");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n_rows).collect();
    for i in 0..size {
        let j = rng.gen_range(i..n_rows);
        pool.swap(i, j);
    }
    let mut out = pool[..size].to_vec();
    out.sort_unstable();
    out
}

/// Seeded uniform random partition of `0..n_rows` into `k` folds whose sizes
/// differ by at most one; each fold ascending.
pub fn random_partition(n_rows: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    assert!(k >= 1 && k <= n_rows, "fold count out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n_rows).collect();
    for i in 0..n_rows - 1 {
        let j = rng.gen_range(i..n_rows);
        pool.swap(i, j);
    }
    let base = n_rows / k;
    let extra = n_rows % k;
    let mut folds = Vec::with_capacity(k);
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let mut part = pool[cursor..cursor + size].to_vec();
        part.sort_unstable();
        folds.push(part);
        cursor += size;
    }
    folds
}

/// One-sided Wilcoxon rank-sum p-value for the alternative "sample `a` is
/// stochastically smaller than sample `b`". Normal approximation with
/// midranks, tie correction, and continuity correction.
pub fn rank_sum_one_sided_p(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "samples must be non-empty");
    let m = a.len();
    let n = b.len();
    let total = m + n;
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < total {
        let mut j = i;
        while j < total && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let count = (j - i) as f64;
        let midrank = (i + 1 + j) as f64 / 2.0; // average of ranks i+1 ..= j
        for item in &pooled[i..j] {
            if item.1 {
                rank_sum_a += midrank;
            }
        }
        tie_term += count * count * count - count;
        i = j;
    }

    let m_f = m as f64;
    let n_f = n as f64;
    let total_f = total as f64;
    let mean = m_f * (total_f + 1.0) / 2.0;
    let variance = m_f * n_f / 12.0 * ((total_f + 1.0) - tie_term / (total_f * (total_f - 1.0)));
    if variance <= 0.0 {
        // Every observation tied: no evidence either way.
        return 0.5;
    }
    let z = (rank_sum_a - mean + 0.5) / variance.sqrt();
    standard_normal_cdf(z)
}

/// Abramowitz-Stegun 7.1.26 polynomial approximation; absolute error below
/// 1.5e-7, ample for thresholding p-values.
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}
