//! Empirical energy-distance estimators.
//!
//! Three estimators are exposed, all over Euclidean distances in the
//! dataset's (standardized) coordinates:
//!
//! * [`energy_full`] - energy distance between a subset and the whole
//!   dataset (three terms),
//! * [`energy_between`] - energy distance between two disjoint index sets,
//! * [`energy_plot_metric`] - the first two terms of [`energy_full`]; the
//!   third term is constant for a fixed dataset, so this is the metric used
//!   when comparing splits of the same data.
//!
//! The double sums run over up to `N^2` distances, and the estimators
//! cancel terms of order one down to values that can be many orders of
//! magnitude smaller, so each sum accumulates with Neumaier compensation.
//! Index sets are canonicalized to ascending order before summation, so
//! every estimator is exactly invariant under permutation of its input
//! indices, and results are byte-identical regardless of thread count.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Result, TwinError};

/// Rows per parallel work unit. Fixed so the reduction order, and therefore
/// the floating-point result, does not depend on the thread count.
const CHUNK: usize = 128;

/// Neumaier-compensated accumulator; deterministic for a fixed sequence.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: f64,
    compensation: f64,
}

impl Accumulator {
    #[inline]
    fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s.sqrt()
}

fn combine(partials: &[f64]) -> f64 {
    let mut acc = Accumulator::default();
    for &p in partials {
        acc.add(p);
    }
    acc.total()
}

/// Sum of distances over the full rectangle `a x b` (self-pairs included,
/// contributing zero when `a` and `b` share rows).
fn sum_cross(data: &Dataset, a: &[usize], b: &[usize]) -> f64 {
    let partials: Vec<f64> = a
        .par_chunks(CHUNK)
        .map(|rows| {
            let mut acc = Accumulator::default();
            for &i in rows {
                let ri = data.row(i);
                for &j in b {
                    acc.add(distance(ri, data.row(j)));
                }
            }
            acc.total()
        })
        .collect();
    combine(&partials)
}

/// Sum of distances over `a x a`, exploiting symmetry bottom-up.
fn sum_within(data: &Dataset, a: &[usize]) -> f64 {
    let chunk_starts: Vec<usize> = (0..a.len()).step_by(CHUNK).collect();
    let partials: Vec<f64> = chunk_starts
        .par_iter()
        .map(|&start| {
            let end = (start + CHUNK).min(a.len());
            let mut acc = Accumulator::default();
            for p in start..end {
                let ri = data.row(a[p]);
                for &j in &a[p + 1..] {
                    acc.add(distance(ri, data.row(j)));
                }
            }
            acc.total()
        })
        .collect();
    2.0 * combine(&partials)
}

/// Validates an index set and returns it sorted ascending.
fn canonical_subset(subset: &[usize], n_rows: usize, must_be_proper: bool) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(TwinError::EmptySubset);
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(TwinError::DuplicateIndex { index: pair[0] });
        }
    }
    let &last = sorted.last().unwrap();
    if last >= n_rows {
        return Err(TwinError::RowOutOfRange {
            index: last,
            len: n_rows,
        });
    }
    if must_be_proper && sorted.len() == n_rows {
        return Err(TwinError::SubsetIsWholeDataset);
    }
    Ok(sorted)
}

fn all_rows(n_rows: usize) -> Vec<usize> {
    (0..n_rows).collect()
}

fn complement(sorted_subset: &[usize], n_rows: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n_rows - sorted_subset.len());
    let mut it = sorted_subset.iter().peekable();
    for i in 0..n_rows {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

/// Energy distance between `subset` and the whole dataset:
/// `2/(nN) sum |U_i - Z_j| - 1/n^2 sum |U_i - U_j| - 1/N^2 sum |Z_i - Z_j|`.
pub fn energy_full(subset: &[usize], data: &Dataset) -> Result<f64> {
    let n_rows = data.n_rows();
    let subset = canonical_subset(subset, n_rows, true)?;
    let all = all_rows(n_rows);
    let n = subset.len() as f64;
    let big_n = n_rows as f64;
    Ok(2.0 / (n * big_n) * sum_cross(data, &subset, &all)
        - sum_within(data, &subset) / (n * n)
        - sum_within(data, &all) / (big_n * big_n))
}

/// Energy distance between two disjoint index sets:
/// `2/(nm) sum |U_i - V_j| - 1/n^2 sum |U_i - U_j| - 1/m^2 sum |V_i - V_j|`.
pub fn energy_between(part_a: &[usize], part_b: &[usize], data: &Dataset) -> Result<f64> {
    let n_rows = data.n_rows();
    let a = canonical_subset(part_a, n_rows, false)?;
    let b = canonical_subset(part_b, n_rows, false)?;
    let mut ia = a.iter().peekable();
    for &j in &b {
        while ia.peek().is_some_and(|&&i| i < j) {
            ia.next();
        }
        if ia.peek() == Some(&&j) {
            return Err(TwinError::OverlappingParts { index: j });
        }
    }
    let n = a.len() as f64;
    let m = b.len() as f64;
    Ok(2.0 / (n * m) * sum_cross(data, &a, &b)
        - sum_within(data, &a) / (n * n)
        - sum_within(data, &b) / (m * m))
}

/// First two terms of [`energy_full`]:
/// `2/(nN) sum |U_i - Z_j| - 1/n^2 sum |U_i - U_j|`.
pub fn energy_plot_metric(subset: &[usize], data: &Dataset) -> Result<f64> {
    let n_rows = data.n_rows();
    let subset = canonical_subset(subset, n_rows, true)?;
    let all = all_rows(n_rows);
    let n = subset.len() as f64;
    let big_n = n_rows as f64;
    Ok(2.0 / (n * big_n) * sum_cross(data, &subset, &all) - sum_within(data, &subset) / (n * n))
}

/// Both sides of the identity
/// `energy_full(A, D) = (1 - n/N)^2 * energy_between(A, D \ A, D)`.
#[derive(Debug, Clone, Copy)]
pub struct Prop1Check {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_gap: f64,
}

/// Evaluates the subset-vs-dataset energy two ways: directly, and through
/// the between-sets estimator scaled by `(1 - n/N)^2`. The relative gap
/// should be at numerical noise level for any subset whatsoever.
pub fn verify_proposition1(part_a: &[usize], data: &Dataset) -> Result<Prop1Check> {
    let n_rows = data.n_rows();
    let a = canonical_subset(part_a, n_rows, true)?;
    let rest = complement(&a, n_rows);
    let lhs = energy_full(&a, data)?;
    let gamma = a.len() as f64 / n_rows as f64;
    let rhs = (1.0 - gamma) * (1.0 - gamma) * energy_between(&a, &rest, data)?;
    let relative_gap = (lhs - rhs).abs() / lhs.abs().max(1e-300);
    Ok(Prop1Check {
        lhs,
        rhs,
        relative_gap,
    })
}

/// All three estimators for one subset of the dataset.
#[derive(Debug, Clone, Copy)]
pub struct EnergyReport {
    /// Subset-vs-dataset energy, all three terms.
    pub full: f64,
    /// Subset-vs-complement energy.
    pub between: f64,
    /// First two terms of `full`.
    pub plot_metric: f64,
    /// Subset size.
    pub n: usize,
    /// Dataset size.
    pub n_total: usize,
}

/// Computes [`EnergyReport`] for a proper subset; the complement is the rest
/// of the rows.
pub fn energy_report(subset: &[usize], data: &Dataset) -> Result<EnergyReport> {
    let n_rows = data.n_rows();
    let a = canonical_subset(subset, n_rows, true)?;
    let rest = complement(&a, n_rows);
    Ok(EnergyReport {
        full: energy_full(&a, data)?,
        between: energy_between(&a, &rest, data)?,
        plot_metric: energy_plot_metric(&a, data)?,
        n: a.len(),
        n_total: n_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line4() -> Dataset {
        Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap()
    }

    #[test]
    fn full_hand_value() {
        // subset {0,2} of 1-D {0,1,2,3}: 2.5 - 1 - 1.25
        let d = line4();
        let e = energy_full(&[0, 2], &d).unwrap();
        assert!((e - 0.25).abs() < 1e-12, "got {e}");
    }

    #[test]
    fn full_zero_when_everything_coincides() {
        let d = Dataset::from_rows(vec![vec![7.0, 7.0]; 5]).unwrap();
        let e = energy_full(&[1, 3], &d).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn between_hand_value() {
        // {0,2} vs {1,3} on the line: 3 - 1 - 1
        let d = line4();
        let e = energy_between(&[0, 2], &[1, 3], &d).unwrap();
        assert!((e - 1.0).abs() < 1e-12, "got {e}");
    }

    #[test]
    fn between_identical_singletons_is_zero() {
        let d = Dataset::from_rows(vec![vec![2.0], vec![2.0], vec![9.0]]).unwrap();
        let e = energy_between(&[0], &[1], &d).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn between_shifted_clumps() {
        // all-equal points at x=1 vs all-equal points at y=4: 2|x-y| - 0 - 0
        let d = Dataset::from_rows(vec![vec![1.0], vec![1.0], vec![4.0], vec![4.0], vec![4.0]])
            .unwrap();
        let e = energy_between(&[0, 1], &[2, 3, 4], &d).unwrap();
        assert!((e - 6.0).abs() < 1e-12, "got {e}");
    }

    #[test]
    fn plot_metric_hand_value() {
        let d = line4();
        let e = energy_plot_metric(&[0, 2], &d).unwrap();
        assert!((e - 1.5).abs() < 1e-12, "got {e}");
    }

    #[test]
    fn plot_metric_minus_full_is_constant_third_term() {
        let d = line4();
        // 1/N^2 sum |Z_i - Z_j| = 20/16 = 1.25 for the 4-point line
        for subset in [vec![0], vec![0, 2], vec![1, 2, 3]] {
            let diff = energy_plot_metric(&subset, &d).unwrap() - energy_full(&subset, &d).unwrap();
            assert!((diff - 1.25).abs() < 1e-12, "got {diff}");
        }
    }

    #[test]
    fn proposition1_hand_value() {
        let d = line4();
        let check = verify_proposition1(&[0, 2], &d).unwrap();
        assert!((check.lhs - 0.25).abs() < 1e-12);
        assert!((check.rhs - 0.25).abs() < 1e-12);
        assert!(check.relative_gap <= 1e-12);
    }

    #[test]
    fn proposition1_degenerate_split() {
        // n = N-1 on a 3-point set: identity holds with factor (1/N)^2
        let d = Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![5.0]]).unwrap();
        let check = verify_proposition1(&[0, 1], &d).unwrap();
        let between = energy_between(&[0, 1], &[2], &d).unwrap();
        assert!((check.rhs - between / 9.0).abs() < 1e-12);
        assert!(check.relative_gap <= 1e-9, "gap {}", check.relative_gap);
    }

    #[test]
    fn rejects_bad_subsets() {
        let d = line4();
        assert!(matches!(energy_full(&[], &d), Err(TwinError::EmptySubset)));
        assert!(matches!(
            energy_full(&[0, 1, 2, 3], &d),
            Err(TwinError::SubsetIsWholeDataset)
        ));
        assert!(matches!(
            energy_full(&[1, 1], &d),
            Err(TwinError::DuplicateIndex { index: 1 })
        ));
        assert!(matches!(
            energy_between(&[0, 1], &[1, 2], &d),
            Err(TwinError::OverlappingParts { index: 1 })
        ));
        assert!(matches!(
            energy_between(&[0], &[], &d),
            Err(TwinError::EmptySubset)
        ));
    }

    #[test]
    fn permutation_invariance_is_exact() {
        let d = Dataset::from_rows(vec![
            vec![0.3, -1.2],
            vec![2.0, 0.4],
            vec![-0.7, 0.9],
            vec![1.4, 1.4],
            vec![-2.2, 0.1],
        ])
        .unwrap();
        let a = energy_between(&[0, 2, 4], &[1, 3], &d).unwrap();
        let b = energy_between(&[4, 0, 2], &[3, 1], &d).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let p = energy_plot_metric(&[0, 2, 4], &d).unwrap();
        let q = energy_plot_metric(&[2, 4, 0], &d).unwrap();
        assert_eq!(p.to_bits(), q.to_bits());
    }
}
