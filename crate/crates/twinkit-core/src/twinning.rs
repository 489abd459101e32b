//! Sequential carving of a dataset into two statistically similar twins.
//!
//! With an inverse splitting ratio `r`, the rows are consumed as
//! `ceil(N / r)` disjoint subsets. Each subset starts from an anchor point
//! `u`, adds the `r - 1` unmasked points nearest to `u`, routes `u` to the
//! small twin `d1` and the rest to `d2`, then masks the whole subset. The
//! next anchor is the unmasked point closest to the previous subset's
//! farthest member, so consecutive subsets tile the data with little
//! overlap. The final subset absorbs whatever remains.
//!
//! The run never evaluates an energy; with the masked kd-tree behind it the
//! average cost stays at `O(d N log N)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Result, TwinError};
use crate::masked_index::MaskedIndex;

/// How the first anchor point is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPolicy {
    /// The row farthest from the column-mean vector of the (standardized)
    /// coordinates; ties go to the lowest row index. Fully deterministic.
    FarthestFromCentroid,
    /// A caller-supplied row.
    FixedIndex(usize),
    /// A uniformly drawn row from a seeded generator.
    Random(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct TwinParams {
    /// Inverse splitting ratio; the small twin gets `ceil(N / r)` rows.
    pub r: usize,
    pub start: StartPolicy,
}

/// Outcome of one twinning run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinResult {
    /// Anchor rows in selection order; the small twin.
    pub d1: Vec<usize>,
    /// All remaining rows; the large twin.
    pub d2: Vec<usize>,
    /// The carved subsets in selection order. Each starts with its anchor,
    /// followed by the neighbors ascending by distance from the anchor.
    pub subsets: Vec<Vec<usize>>,
}

/// Picks the starting row over the whole dataset.
pub fn select_start(data: &Dataset, policy: StartPolicy) -> Result<usize> {
    if data.n_rows() == 0 {
        return Err(TwinError::EmptyDataset);
    }
    let active: Vec<usize> = (0..data.n_rows()).collect();
    select_start_among(data, &active, policy)
}

/// Starting row restricted to `active` (ascending row ids). A
/// `FixedIndex` that is valid for the dataset but no longer active falls
/// back to the lowest active row, which keeps chained runs over shrinking
/// remainders well-defined.
pub(crate) fn select_start_among(
    data: &Dataset,
    active: &[usize],
    policy: StartPolicy,
) -> Result<usize> {
    debug_assert!(!active.is_empty());
    match policy {
        StartPolicy::FixedIndex(row) => {
            if row >= data.n_rows() {
                return Err(TwinError::RowOutOfRange {
                    index: row,
                    len: data.n_rows(),
                });
            }
            if active.binary_search(&row).is_ok() {
                Ok(row)
            } else {
                Ok(active[0])
            }
        }
        StartPolicy::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(active[rng.gen_range(0..active.len())])
        }
        StartPolicy::FarthestFromCentroid => {
            let d = data.n_cols();
            let mut centroid = vec![0.0; d];
            for &row in active {
                for (c, &v) in centroid.iter_mut().zip(data.row(row)) {
                    *c += v;
                }
            }
            for c in &mut centroid {
                *c /= active.len() as f64;
            }
            let mut best_row = active[0];
            let mut best_d2 = -1.0;
            for &row in active {
                let mut d2 = 0.0;
                for (x, c) in data.row(row).iter().zip(&centroid) {
                    let diff = x - c;
                    d2 += diff * diff;
                }
                if d2 > best_d2 {
                    best_d2 = d2;
                    best_row = row;
                }
            }
            Ok(best_row)
        }
    }
}

/// Splits the whole dataset. `d1` receives `ceil(N / r)` rows.
pub fn twin(data: &Dataset, params: &TwinParams) -> Result<TwinResult> {
    let active: Vec<usize> = (0..data.n_rows()).collect();
    twin_active(data, &active, params)
}

/// The compression use case: only the small, statistically similar twin.
pub fn twin_compress(data: &Dataset, params: &TwinParams) -> Result<Vec<usize>> {
    Ok(twin(data, params)?.d1)
}

/// Twinning restricted to `active` (ascending row ids). Rows outside
/// `active` are pre-masked in the index; all returned row ids are original
/// dataset rows.
pub(crate) fn twin_active(
    data: &Dataset,
    active: &[usize],
    params: &TwinParams,
) -> Result<TwinResult> {
    let n_active = active.len();
    if params.r < 2 {
        return Err(TwinError::RatioTooSmall { r: params.r });
    }
    if params.r > n_active {
        return Err(TwinError::RatioTooLarge {
            r: params.r,
            rows: n_active,
        });
    }

    let mut index = MaskedIndex::build(data)?;
    if n_active < data.n_rows() {
        let mut it = active.iter().peekable();
        for row in 0..data.n_rows() {
            if it.peek() == Some(&&row) {
                it.next();
            } else {
                index.mask(row)?;
            }
        }
    }

    let r = params.r;
    let n_subsets = n_active.div_ceil(r);
    let mut d1 = Vec::with_capacity(n_subsets);
    let mut d2 = Vec::with_capacity(n_active - n_subsets);
    let mut subsets = Vec::with_capacity(n_subsets);
    // Farthest member of the previous subset; a singleton subset stands in
    // for itself.
    let mut previous_farthest = usize::MAX;

    for i in 0..n_subsets {
        let anchor = if i == 0 {
            select_start_among(data, active, params.start)?
        } else {
            index.nearest(data.row(previous_farthest))?.0
        };
        // The last subset absorbs every remaining point.
        let take = if i + 1 == n_subsets {
            index.alive_count()
        } else {
            r
        };
        index.mask(anchor)?;
        let neighbors = index.k_nearest(data.row(anchor), take - 1)?;

        let mut subset = Vec::with_capacity(take);
        subset.push(anchor);
        d1.push(anchor);
        for &(row, _) in &neighbors {
            index.mask(row)?;
            subset.push(row);
            d2.push(row);
        }
        previous_farthest = neighbors.last().map_or(anchor, |&(row, _)| row);
        subsets.push(subset);
    }
    debug_assert_eq!(index.alive_count(), 0);
    debug_assert_eq!(d1.len(), n_subsets);

    Ok(TwinResult { d1, d2, subsets })
}
