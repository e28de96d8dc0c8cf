//! Exact solvers: longest increasing/decreasing subsequences, planar-matching
//! size and witness recovery, LCS by dynamic programming and by sparse match
//! lists, maximum-weight planar matchings, the weak-column height statistic,
//! and an exhaustive oracle for small graphs.
//!
//! All solvers are pure functions safe for concurrent use.

use crate::error::{Error, Result};
use crate::fenwick::MaxFenwick;
use crate::models::{BernoulliMatrix, OrderedBipartiteGraph, WeightedGrid, WordPair};

/// Length of the longest strictly increasing subsequence, O(N log N)
/// patience insertion. The empty sequence has length 0.
pub fn lis_length<T: Ord>(seq: &[T]) -> usize {
    let mut tails: Vec<&T> = Vec::new();
    for x in seq {
        let pos = tails.partition_point(|t| *t < x);
        if pos == tails.len() {
            tails.push(x);
        } else {
            tails[pos] = x;
        }
    }
    tails.len()
}

/// Length of the longest strictly decreasing subsequence.
pub fn lds_length<T: Ord>(seq: &[T]) -> usize {
    let mut tails: Vec<&T> = Vec::new();
    for x in seq {
        let pos = tails.partition_point(|t| *t > x);
        if pos == tails.len() {
            tails.push(x);
        } else {
            tails[pos] = x;
        }
    }
    tails.len()
}

/// A planar matching: edges strictly increasing in both coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarMatching {
    edges: Vec<(u32, u32)>,
}

impl PlanarMatching {
    pub fn new(edges: Vec<(u32, u32)>) -> Result<Self> {
        let increasing = edges
            .windows(2)
            .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
        if !increasing {
            return Err(Error::invalid(
                "planar matching",
                "edges must be strictly increasing in both coordinates",
            ));
        }
        Ok(PlanarMatching { edges })
    }

    pub fn empty() -> Self {
        PlanarMatching { edges: Vec::new() }
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

// Visit edges in processing order (a ascending, b descending within equal a),
// which turns planar matchings into strictly increasing b-subsequences.
fn for_each_processed(edges: &[(u32, u32)], mut f: impl FnMut(usize)) {
    let mut i = 0;
    while i < edges.len() {
        let a = edges[i].0;
        let mut j = i;
        while j < edges.len() && edges[j].0 == a {
            j += 1;
        }
        for idx in (i..j).rev() {
            f(idx);
        }
        i = j;
    }
}

/// The maximum number of edges in a planar matching of `g`: edges are sorted
/// by (a ascending, b descending) and a strict LIS is taken on the
/// b-coordinates, O(|E| log |E|).
pub fn planar_matching_size(g: &OrderedBipartiteGraph) -> usize {
    let edges = g.edges();
    let mut tails: Vec<u32> = Vec::new();
    for_each_processed(edges, |idx| {
        let b = edges[idx].1;
        let pos = tails.partition_point(|&t| t < b);
        if pos == tails.len() {
            tails.push(b);
        } else {
            tails[pos] = b;
        }
    });
    tails.len()
}

/// Recover a maximum planar matching. Among all witnesses, returns the one
/// whose edge sequence is lexicographically smallest under the processing
/// order (a ascending, b descending).
pub fn planar_matching_recover(g: &OrderedBipartiteGraph) -> PlanarMatching {
    let edges = g.edges();
    if edges.is_empty() {
        return PlanarMatching::empty();
    }

    let mut order = Vec::with_capacity(edges.len());
    for_each_processed(edges, |idx| order.push(idx));

    // chain_from[i]: longest planar chain starting at edges[i]. Computed by
    // scanning the processing order backwards; flipping b turns "chains
    // starting here" into plain strict-LIS lengths.
    let mut chain_from = vec![0u32; edges.len()];
    let mut tails: Vec<u32> = Vec::new();
    for &idx in order.iter().rev() {
        let key = u32::MAX - edges[idx].1;
        let pos = tails.partition_point(|&t| t < key);
        if pos == tails.len() {
            tails.push(key);
        } else {
            tails[pos] = key;
        }
        chain_from[idx] = pos as u32 + 1;
    }
    let total = tails.len() as u32;

    let mut witness = Vec::with_capacity(total as usize);
    let mut need = total;
    let mut prev: Option<(u32, u32)> = None;
    for &idx in &order {
        if need == 0 {
            break;
        }
        let (a, b) = edges[idx];
        let compatible = prev.is_none_or(|(pa, pb)| a > pa && b > pb);
        if compatible && chain_from[idx] == need {
            witness.push((a, b));
            prev = Some((a, b));
            need -= 1;
        }
    }
    debug_assert_eq!(witness.len(), total as usize);
    PlanarMatching { edges: witness }
}

/// Classical O(r*s) dynamic-programming LCS length; the ground-truth oracle
/// for word inputs.
pub fn lcs_length_dp(w: &WordPair) -> usize {
    let a = w.word_a();
    let b = w.word_b();
    let mut prev = vec![0u32; b.len() + 1];
    let mut curr = vec![0u32; b.len() + 1];
    for &ca in a {
        for (j, &cb) in b.iter().enumerate() {
            curr[j + 1] = if ca == cb {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()] as usize
}

/// Sparse match-list LCS: equals [`lcs_length_dp`] but runs in
/// O((r + s + m) log s) where m is the number of matching character pairs.
/// This is the production path when matches are rare.
pub fn lcs_length_sparse(w: &WordPair) -> usize {
    // Positions of word_b keyed by character, sorted by (character, position).
    let mut by_char: Vec<(u32, u32)> = w
        .word_b()
        .iter()
        .enumerate()
        .map(|(j, &c)| (c, j as u32 + 1))
        .collect();
    by_char.sort_unstable();

    // For each a-position in order, insert its matches with b descending;
    // a strict LIS on b-positions is then exactly an LCS.
    let mut tails: Vec<u32> = Vec::new();
    for &c in w.word_a() {
        let lo = by_char.partition_point(|&(cc, _)| cc < c);
        let hi = by_char.partition_point(|&(cc, _)| cc <= c);
        for &(_, j) in by_char[lo..hi].iter().rev() {
            let pos = tails.partition_point(|&t| t < j);
            if pos == tails.len() {
                tails.push(j);
            } else {
                tails[pos] = j;
            }
        }
    }
    tails.len()
}

/// Maximum total weight of a planar matching on the grid's cells, counting a
/// cell's weight when it is selected. Zero-weight cells never help, so only
/// nonzero cells are processed: O(m log n) plus the O(n^2) scan.
pub fn max_weight_planar(g: &WeightedGrid) -> u64 {
    let n = g.n() as usize;
    let mut fw = MaxFenwick::new(n);
    let mut row_buf: Vec<(usize, u64)> = Vec::new();
    let mut best = 0u64;
    for i in 0..n {
        row_buf.clear();
        for j in 0..n {
            let w = g.weight(i, j);
            if w > 0 {
                // Best chain ending strictly left of column j in earlier rows.
                row_buf.push((j, fw.prefix_max(j) + w));
            }
        }
        // Commit after the row is fully queried so one row never chains to itself.
        for &(j, v) in &row_buf {
            fw.raise(j, v);
            best = best.max(v);
        }
    }
    best
}

/// Longest sequence of 1-cells with rows strictly increasing and columns
/// nondecreasing. Rows are processed in increasing order; within a row,
/// columns are visited in decreasing order and a weak (<=) patience insert is
/// used, which enforces at most one cell per row in one pass.
pub fn odb_height(mat: &BernoulliMatrix) -> usize {
    let n = mat.n() as usize;
    let mut tails: Vec<u32> = Vec::new();
    for i in 0..n {
        for j in (0..n).rev() {
            if mat.get(i, j) {
                let col = j as u32;
                let pos = tails.partition_point(|&t| t <= col);
                if pos == tails.len() {
                    tails.push(col);
                } else {
                    tails[pos] = col;
                }
            }
        }
    }
    tails.len()
}

const BRUTE_FORCE_EDGE_LIMIT: usize = 25;

/// Exhaustive maximum over all noncrossing edge subsets; the testing oracle.
/// Rejects graphs with more than 25 edges.
pub fn brute_force_planar_size(g: &OrderedBipartiteGraph) -> Result<usize> {
    let edges = g.edges();
    if edges.len() > BRUTE_FORCE_EDGE_LIMIT {
        return Err(Error::TooLarge {
            what: "brute_force_planar_size",
            reason: format!("{} edges exceeds limit {BRUTE_FORCE_EDGE_LIMIT}", edges.len()),
        });
    }
    fn extend(edges: &[(u32, u32)], last: Option<(u32, u32)>, start: usize) -> usize {
        let mut best = 0;
        for i in start..edges.len() {
            let e = edges[i];
            let ok = match last {
                None => true,
                Some((la, lb)) => e.0 > la && e.1 > lb,
            };
            if ok {
                best = best.max(1 + extend(edges, Some(e), i + 1));
            }
        }
        best
    }
    Ok(extend(edges, None, 0))
}
