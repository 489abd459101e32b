//! Exact Euclidean nearest-neighbor index with logical point removal.
//!
//! The tree is built once over all rows; removing a point ("masking") only
//! flips a flag and decrements per-node alive counters along the leaf-to-root
//! path, so no restructuring ever happens. Queries skip masked points and
//! prune any subtree whose alive counter is zero, which keeps them fast even
//! when nearly every point has been masked.
//!
//! Ordering contract: candidates compare by `(distance, row index)`, so ties
//! always resolve to the lowest row index and every query is deterministic.
//! Comparisons happen on squared distances; reported distances are true
//! Euclidean.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::dataset::Dataset;
use crate::error::{Result, TwinError};

const LEAF_SIZE: usize = 16;
const NO_NODE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    left: u32,
    right: u32,
    parent: u32,
    /// Unmasked points in this subtree.
    alive: u32,
    /// Leaf payload: range into `perm`. Unused for internal nodes.
    start: u32,
    end: u32,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.left == NO_NODE
    }
}

/// Traversal counters, exposed so tests can assert pruning behavior.
/// Counters accumulate, so one instance can observe a whole query sequence.
#[derive(Debug, Clone, Copy)]
pub struct QueryStats {
    /// Nodes entered during the query.
    pub nodes_visited: u64,
    /// Leaves whose points were scanned.
    pub leaves_scanned: u64,
    /// Smallest alive counter seen on any entered node. Stays at `u64::MAX`
    /// if nothing was visited; a value of zero would mean a dead subtree was
    /// descended, which the traversal must never do.
    pub min_alive_seen: u64,
}

impl Default for QueryStats {
    fn default() -> Self {
        Self {
            nodes_visited: 0,
            leaves_scanned: 0,
            min_alive_seen: u64::MAX,
        }
    }
}

impl QueryStats {
    fn enter(&mut self, alive: u32) {
        self.nodes_visited += 1;
        self.min_alive_seen = self.min_alive_seen.min(alive as u64);
    }
}

/// Candidate ordered by `(squared distance, row index)`; the heap keeps the
/// worst candidate on top.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    row: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.row.cmp(&other.row))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// kd-tree over a dataset's rows with per-point masking.
#[derive(Debug, Clone)]
pub struct MaskedIndex<'d> {
    data: &'d Dataset,
    dim: usize,
    nodes: Vec<Node>,
    /// Per-node bounding box, `2 * dim` values: mins then maxs.
    bounds: Vec<f64>,
    /// Row ids grouped so each leaf owns a contiguous slice.
    perm: Vec<u32>,
    /// Point coordinates copied into `perm` order so leaf scans stay
    /// sequential in memory.
    leaf_points: Vec<f64>,
    /// Row id -> position in `perm`.
    position_of: Vec<u32>,
    /// Row id -> leaf node id.
    leaf_of: Vec<u32>,
    /// Alive flags in `perm` order.
    alive_at: Vec<bool>,
    alive_total: usize,
}

impl<'d> MaskedIndex<'d> {
    /// Builds the tree: median split on the coordinate of largest spread,
    /// leaves of up to 16 points.
    pub fn build(data: &'d Dataset) -> Result<Self> {
        let n = data.n_rows();
        if n == 0 {
            return Err(TwinError::EmptyDataset);
        }
        let dim = data.n_cols();
        let mut index = Self {
            data,
            dim,
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 2),
            bounds: Vec::new(),
            perm: (0..n as u32).collect(),
            leaf_points: Vec::new(),
            position_of: vec![0; n],
            leaf_of: vec![NO_NODE; n],
            alive_at: vec![true; n],
            alive_total: n,
        };
        index.build_node(0, n, NO_NODE);
        index.leaf_points.reserve_exact(n * dim);
        for (pos, &row) in index.perm.iter().enumerate() {
            index.position_of[row as usize] = pos as u32;
            index.leaf_points.extend_from_slice(data.row(row as usize));
        }
        Ok(index)
    }

    /// Builds the subtree over `perm[lo..hi]` and returns its node id.
    fn build_node(&mut self, lo: usize, hi: usize, parent: u32) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            left: NO_NODE,
            right: NO_NODE,
            parent,
            alive: (hi - lo) as u32,
            start: lo as u32,
            end: hi as u32,
        });

        // Bounding box of the slice.
        let base = self.bounds.len();
        self.bounds
            .extend(std::iter::repeat_n(f64::INFINITY, self.dim));
        self.bounds
            .extend(std::iter::repeat_n(f64::NEG_INFINITY, self.dim));
        let mut spread_dim = 0;
        let mut spread = -1.0;
        for &row in &self.perm[lo..hi] {
            let point = self.data.row(row as usize);
            for (j, &v) in point.iter().enumerate() {
                if v < self.bounds[base + j] {
                    self.bounds[base + j] = v;
                }
                if v > self.bounds[base + self.dim + j] {
                    self.bounds[base + self.dim + j] = v;
                }
            }
        }
        for j in 0..self.dim {
            let s = self.bounds[base + self.dim + j] - self.bounds[base + j];
            if s > spread {
                spread = s;
                spread_dim = j;
            }
        }

        // All points coincide (spread 0) -> keep as a leaf no matter the size.
        if hi - lo <= LEAF_SIZE || spread <= 0.0 {
            for &row in &self.perm[lo..hi] {
                self.leaf_of[row as usize] = id;
            }
            return id;
        }

        let mid = lo + (hi - lo) / 2;
        let data = self.data;
        self.perm[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            data.row(a as usize)[spread_dim]
                .total_cmp(&data.row(b as usize)[spread_dim])
                .then(a.cmp(&b))
        });
        let left = self.build_node(lo, mid, id);
        let right = self.build_node(mid, hi, id);
        self.nodes[id as usize].left = left;
        self.nodes[id as usize].right = right;
        id
    }

    pub fn n_points(&self) -> usize {
        self.alive_at.len()
    }

    /// Unmasked points remaining.
    pub fn alive_count(&self) -> usize {
        self.alive_total
    }

    pub fn is_alive(&self, row: usize) -> bool {
        self.alive_at[self.position_of[row] as usize]
    }

    /// Masks a point so no future query returns it. Decrements the alive
    /// counters and refits the bounding boxes along the leaf-to-root path,
    /// so boxes always hug the remaining unmasked points and pruning stays
    /// sharp as masking approaches 100%.
    pub fn mask(&mut self, row: usize) -> Result<()> {
        if row >= self.alive_at.len() {
            return Err(TwinError::RowOutOfRange {
                index: row,
                len: self.alive_at.len(),
            });
        }
        let pos = self.position_of[row] as usize;
        if !self.alive_at[pos] {
            return Err(TwinError::AlreadyMasked { index: row });
        }
        self.alive_at[pos] = false;
        self.alive_total -= 1;
        let leaf = self.leaf_of[row];
        let mut node = leaf;
        while node != NO_NODE {
            self.nodes[node as usize].alive -= 1;
            node = self.nodes[node as usize].parent;
        }
        self.refit_leaf(leaf);
        self.refit_ancestors(leaf);
        Ok(())
    }

    /// Recomputes a leaf's bounding box over its alive points.
    fn refit_leaf(&mut self, leaf: u32) {
        let node = &self.nodes[leaf as usize];
        let (start, end) = (node.start as usize, node.end as usize);
        let dim = self.dim;
        let base = leaf as usize * 2 * dim;
        for j in 0..dim {
            self.bounds[base + j] = f64::INFINITY;
            self.bounds[base + dim + j] = f64::NEG_INFINITY;
        }
        for pos in start..end {
            if !self.alive_at[pos] {
                continue;
            }
            let point = &self.leaf_points[pos * dim..(pos + 1) * dim];
            for (j, &v) in point.iter().enumerate() {
                if v < self.bounds[base + j] {
                    self.bounds[base + j] = v;
                }
                if v > self.bounds[base + dim + j] {
                    self.bounds[base + dim + j] = v;
                }
            }
        }
    }

    /// Refits boxes up the tree as unions of the alive children, stopping
    /// as soon as a box is unchanged.
    fn refit_ancestors(&mut self, from: u32) {
        let dim = self.dim;
        let mut node = self.nodes[from as usize].parent;
        while node != NO_NODE {
            let n = &self.nodes[node as usize];
            let (left, right, parent) = (n.left, n.right, n.parent);
            let base = node as usize * 2 * dim;
            let mut changed = false;
            for j in 0..2 * dim {
                let mut value = if j < dim {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                };
                for child in [left, right] {
                    if self.nodes[child as usize].alive == 0 {
                        continue;
                    }
                    let v = self.bounds[child as usize * 2 * dim + j];
                    value = if j < dim { value.min(v) } else { value.max(v) };
                }
                if value != self.bounds[base + j] {
                    self.bounds[base + j] = value;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            node = parent;
        }
    }

    fn check_query(&self, query: &[f64]) -> Result<()> {
        if query.len() != self.dim {
            return Err(TwinError::DimensionMismatch {
                expected: self.dim,
                found: query.len(),
            });
        }
        Ok(())
    }

    /// Smallest possible squared distance from `query` to any point inside
    /// the node's bounding box.
    fn bbox_min_d2(&self, node: u32, query: &[f64]) -> f64 {
        let base = node as usize * 2 * self.dim;
        let mins = &self.bounds[base..base + self.dim];
        let maxs = &self.bounds[base + self.dim..base + 2 * self.dim];
        let mut s = 0.0;
        for j in 0..self.dim {
            let v = query[j];
            let e = if v < mins[j] {
                mins[j] - v
            } else if v > maxs[j] {
                v - maxs[j]
            } else {
                0.0
            };
            s += e * e;
        }
        s
    }

    /// Squared distance from the point stored at `pos` (in `perm` order).
    fn sq_dist_at(&self, pos: usize, query: &[f64]) -> f64 {
        let point = &self.leaf_points[pos * self.dim..(pos + 1) * self.dim];
        let mut s = 0.0;
        for (x, y) in point.iter().zip(query) {
            let d = x - y;
            s += d * d;
        }
        s
    }

    /// Closest unmasked point to `query`; ties go to the lowest row index.
    pub fn nearest(&self, query: &[f64]) -> Result<(usize, f64)> {
        let mut stats = QueryStats::default();
        self.nearest_with_stats(query, &mut stats)
    }

    /// [`Self::nearest`] with traversal counters filled in.
    pub fn nearest_with_stats(
        &self,
        query: &[f64],
        stats: &mut QueryStats,
    ) -> Result<(usize, f64)> {
        self.check_query(query)?;
        if self.alive_total == 0 {
            return Err(TwinError::AllMasked);
        }
        let mut best = Candidate {
            d2: f64::INFINITY,
            row: u32::MAX,
        };
        self.nearest_rec(0, query, &mut best, stats);
        Ok((best.row as usize, best.d2.sqrt()))
    }

    fn nearest_rec(&self, id: u32, query: &[f64], best: &mut Candidate, stats: &mut QueryStats) {
        let node = &self.nodes[id as usize];
        stats.enter(node.alive);
        if node.is_leaf() {
            stats.leaves_scanned += 1;
            for pos in node.start as usize..node.end as usize {
                if !self.alive_at[pos] {
                    continue;
                }
                let cand = Candidate {
                    d2: self.sq_dist_at(pos, query),
                    row: self.perm[pos],
                };
                if cand < *best {
                    *best = cand;
                }
            }
            return;
        }
        let (children, count) = self.ordered_children(node, query);
        for &(child, min_d2) in &children[..count] {
            // A pruned box can still hold an exact tie, so only prune on
            // strict >.
            if min_d2 <= best.d2 {
                self.nearest_rec(child, query, best, stats);
            }
        }
    }

    /// Alive children ordered nearest-box first.
    fn ordered_children(&self, node: &Node, query: &[f64]) -> ([(u32, f64); 2], usize) {
        let mut out = [(NO_NODE, 0.0); 2];
        let mut count = 0;
        for child in [node.left, node.right] {
            if self.nodes[child as usize].alive > 0 {
                out[count] = (child, self.bbox_min_d2(child, query));
                count += 1;
            }
        }
        if count == 2 && out[1].1 < out[0].1 {
            out.swap(0, 1);
        }
        (out, count)
    }

    /// The `k` closest unmasked points, ascending by `(distance, row index)`.
    pub fn k_nearest(&self, query: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
        let mut stats = QueryStats::default();
        self.k_nearest_with_stats(query, k, &mut stats)
    }

    /// [`Self::k_nearest`] with traversal counters filled in.
    pub fn k_nearest_with_stats(
        &self,
        query: &[f64],
        k: usize,
        stats: &mut QueryStats,
    ) -> Result<Vec<(usize, f64)>> {
        self.check_query(query)?;
        if k > self.alive_total {
            return Err(TwinError::NotEnoughUnmasked {
                requested: k,
                available: self.alive_total,
            });
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        self.k_nearest_rec(0, query, k, &mut heap, stats);
        let mut out: Vec<(usize, f64)> = heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| (c.row as usize, c.d2.sqrt()))
            .collect();
        debug_assert_eq!(out.len(), k);
        out.truncate(k);
        Ok(out)
    }

    fn k_nearest_rec(
        &self,
        id: u32,
        query: &[f64],
        k: usize,
        heap: &mut BinaryHeap<Candidate>,
        stats: &mut QueryStats,
    ) {
        let node = &self.nodes[id as usize];
        stats.enter(node.alive);
        if node.is_leaf() {
            stats.leaves_scanned += 1;
            for pos in node.start as usize..node.end as usize {
                if !self.alive_at[pos] {
                    continue;
                }
                let cand = Candidate {
                    d2: self.sq_dist_at(pos, query),
                    row: self.perm[pos],
                };
                if heap.len() < k {
                    heap.push(cand);
                } else if cand < *heap.peek().unwrap() {
                    heap.pop();
                    heap.push(cand);
                }
            }
            return;
        }
        let (children, count) = self.ordered_children(node, query);
        for &(child, min_d2) in &children[..count] {
            let prune = heap.len() == k && min_d2 > heap.peek().unwrap().d2;
            if !prune {
                self.k_nearest_rec(child, query, k, heap, stats);
            }
        }
    }
}
