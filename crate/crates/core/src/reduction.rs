//! Degree-based pruning and the matching/permutation correspondence.
//!
//! Removing every edge incident to a node of degree two or more leaves a
//! partial matching G'. The planar-matching size of a partial matching equals
//! the longest increasing subsequence of the permutation formed by its
//! partner ranks, and `L(G') <= L(G) <= L(G') + |E \ E'|`.

use crate::error::{Error, Result};
use crate::models::OrderedBipartiteGraph;
use crate::scalar::Real;

fn degree_counts(g: &OrderedBipartiteGraph) -> (Vec<u32>, Vec<u32>) {
    let mut deg_a = vec![0u32; g.r() as usize];
    let mut deg_b = vec![0u32; g.s() as usize];
    for &(a, b) in g.edges() {
        deg_a[a as usize - 1] += 1;
        deg_b[b as usize - 1] += 1;
    }
    (deg_a, deg_b)
}

/// Keep exactly the edges both of whose endpoints have degree 1 in `g`.
/// The result is a partial matching, and the operation is idempotent.
pub fn prune_degree_ge2(g: &OrderedBipartiteGraph) -> OrderedBipartiteGraph {
    let (deg_a, deg_b) = degree_counts(g);
    let kept = g
        .edges()
        .iter()
        .copied()
        .filter(|&(a, b)| deg_a[a as usize - 1] == 1 && deg_b[b as usize - 1] == 1)
        .collect();
    OrderedBipartiteGraph::new_unchecked(g.r(), g.s(), kept)
}

/// Relabel the matched a-nodes 1..m in order and emit their partners' ranks.
/// The LIS of the output equals the planar-matching size of the input.
/// Errors if any node has degree two or more.
pub fn matching_to_permutation(g: &OrderedBipartiteGraph) -> Result<Vec<u32>> {
    let (deg_a, deg_b) = degree_counts(g);
    if let Some(node) = deg_a.iter().position(|&d| d >= 2) {
        return Err(Error::NotAMatching {
            class: 'A',
            node: node as u32 + 1,
            degree: deg_a[node],
        });
    }
    if let Some(node) = deg_b.iter().position(|&d| d >= 2) {
        return Err(Error::NotAMatching {
            class: 'B',
            node: node as u32 + 1,
            degree: deg_b[node],
        });
    }
    // Edges are sorted by a, and each a appears at most once.
    let partners: Vec<u32> = g.edges().iter().map(|&(_, b)| b).collect();
    let mut sorted = partners.clone();
    sorted.sort_unstable();
    Ok(partners
        .iter()
        .map(|b| sorted.binary_search(b).expect("partner present") as u32 + 1)
        .collect())
}

/// Exact counts describing a pruning step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeStats {
    /// |E| of the original graph.
    pub edges_total: u64,
    /// |E \ E'|.
    pub edges_removed: u64,
    /// Histogram of A-side degrees in the original graph, indexed by degree.
    pub degree_histogram_a: Vec<u64>,
    /// Histogram of B-side degrees in the original graph, indexed by degree.
    pub degree_histogram_b: Vec<u64>,
    /// Y = sum over nodes of (degree if >= 2 else 0); always >= edges_removed.
    pub y_sum: u64,
}

/// Count edges, removed edges, per-side degree histograms, and the
/// degree-overflow total Y for a pruned/original pair.
/// Errors unless `pruned` is exactly the pruning of `original`.
pub fn edge_stats(pruned: &OrderedBipartiteGraph, original: &OrderedBipartiteGraph) -> Result<EdgeStats> {
    if *pruned != prune_degree_ge2(original) {
        return Err(Error::param(
            "pruned",
            "graph is not the pruning of `original`",
        ));
    }
    let (deg_a, deg_b) = degree_counts(original);
    let histogram = |degs: &[u32]| {
        let max = degs.iter().copied().max().unwrap_or(0) as usize;
        let mut h = vec![0u64; max + 1];
        for &d in degs {
            h[d as usize] += 1;
        }
        h
    };
    let y_sum: u64 = deg_a
        .iter()
        .chain(deg_b.iter())
        .map(|&d| if d >= 2 { d as u64 } else { 0 })
        .sum();
    let edges_total = original.edge_count() as u64;
    let edges_removed = edges_total - pruned.edge_count() as u64;
    // Every removed edge has an endpoint of degree >= 2, and such a node
    // contributes all of its edges to Y.
    assert!(edges_removed <= y_sum);
    Ok(EdgeStats {
        edges_total,
        edges_removed,
        degree_histogram_a: histogram(&deg_a),
        degree_histogram_b: histogram(&deg_b),
        y_sum,
    })
}

/// The exact expectation of Y under the random-words model, together with
/// the cruder Markov-style bound `(r + s) * rs / k^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedRemoved<T> {
    /// E[Y] = r*(s/k - (s/k)(1-1/k)^(s-1)) + s*(r/k - (r/k)(1-1/k)^(r-1)).
    pub exact: T,
    /// (r + s) * rs / k^2, which dominates `exact`.
    pub bound: T,
}

/// Exact E[Y] for the random-words model on sizes `(r, s)` over a k-ary
/// alphabet, alongside the `(r + s) rs / k^2` bound.
pub fn expected_removed_exact<T: Real>(r: u64, s: u64, k: u64) -> Result<ExpectedRemoved<T>> {
    if r == 0 || s == 0 || k == 0 {
        return Err(Error::param("r/s/k", "r, s, k must all be at least 1"));
    }
    let rf = T::from_count(r);
    let sf = T::from_count(s);
    let kf = T::from_count(k);
    let one = T::one();
    // mean excess degree of a single node facing `other` nodes:
    // other/k - (other/k) * (1 - 1/k)^(other - 1)
    let side = |other: T| {
        let mean_deg = other / kf;
        let pow = if other == one {
            one
        } else {
            // (1 - 1/k)^(other-1) via exp((other-1) * ln(1 - 1/k)); k = 1
            // gives exp(-inf) = 0, the complete-graph case.
            ((other - one) * (-(one / kf)).ln_1p()).exp()
        };
        mean_deg - mean_deg * pow
    };
    let exact = rf * side(sf) + sf * side(rf);
    let bound = (rf + sf) * rf * sf / (kf * kf);
    Ok(ExpectedRemoved { exact, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sample_word_pair, words_to_graph, RngStream};
    use crate::solvers::{lis_length, planar_matching_size};

    #[test]
    fn prune_keeps_perfect_matchings() {
        let g = OrderedBipartiteGraph::new(3, 3, vec![(1, 2), (2, 3), (3, 1)]).unwrap();
        assert_eq!(prune_degree_ge2(&g), g);
    }

    #[test]
    fn prune_empties_complete_graphs() {
        let g = OrderedBipartiteGraph::complete(2, 2);
        assert!(prune_degree_ge2(&g).edges().is_empty());
    }

    #[test]
    fn prune_hand_case() {
        let g = OrderedBipartiteGraph::new(3, 3, vec![(1, 1), (1, 2), (3, 3)]).unwrap();
        assert_eq!(prune_degree_ge2(&g).edges(), &[(3, 3)]);
    }

    #[test]
    fn prune_is_idempotent_and_sandwiches() {
        for t in 0..200u64 {
            let w = sample_word_pair(30, 30, 5, RngStream::new(701, t)).unwrap();
            let g = words_to_graph(&w);
            let pruned = prune_degree_ge2(&g);
            assert_eq!(prune_degree_ge2(&pruned), pruned, "idempotence, trial {t}");
            let removed = g.edge_count() - pruned.edge_count();
            let lg = planar_matching_size(&g);
            let lp = planar_matching_size(&pruned);
            assert!(lp <= lg && lg <= lp + removed, "sandwich, trial {t}");
        }
    }

    #[test]
    fn matching_to_permutation_hand_cases() {
        let g = OrderedBipartiteGraph::new(2, 2, vec![(1, 1), (2, 2)]).unwrap();
        assert_eq!(matching_to_permutation(&g).unwrap(), vec![1, 2]);
        let g = OrderedBipartiteGraph::new(2, 2, vec![(1, 2), (2, 1)]).unwrap();
        assert_eq!(matching_to_permutation(&g).unwrap(), vec![2, 1]);
        let g = OrderedBipartiteGraph::new(2, 2, vec![]).unwrap();
        assert!(matching_to_permutation(&g).unwrap().is_empty());
    }

    #[test]
    fn matching_to_permutation_rejects_high_degree() {
        let g = OrderedBipartiteGraph::new(2, 2, vec![(1, 1), (1, 2)]).unwrap();
        assert!(matching_to_permutation(&g).is_err());
        let g = OrderedBipartiteGraph::new(2, 2, vec![(1, 1), (2, 1)]).unwrap();
        assert!(matching_to_permutation(&g).is_err());
    }

    #[test]
    fn permutation_lis_equals_planar_size() {
        for t in 0..200u64 {
            let w = sample_word_pair(40, 40, 50, RngStream::new(702, t)).unwrap();
            let m = prune_degree_ge2(&words_to_graph(&w));
            let perm = matching_to_permutation(&m).unwrap();
            assert_eq!(lis_length(&perm), planar_matching_size(&m), "trial {t}");
        }
    }

    #[test]
    fn edge_stats_hand_cases() {
        let g = OrderedBipartiteGraph::new(2, 2, vec![(1, 1), (2, 2)]).unwrap();
        let stats = edge_stats(&prune_degree_ge2(&g), &g).unwrap();
        assert_eq!(stats.edges_removed, 0);
        assert_eq!(stats.y_sum, 0);

        let g = OrderedBipartiteGraph::complete(2, 2);
        let stats = edge_stats(&prune_degree_ge2(&g), &g).unwrap();
        assert_eq!(stats.edges_total, 4);
        assert_eq!(stats.edges_removed, 4);
        assert_eq!(stats.y_sum, 8);
        assert_eq!(stats.degree_histogram_a, vec![0, 0, 2]);
    }

    #[test]
    fn edge_stats_rejects_mismatched_pair() {
        let g = OrderedBipartiteGraph::complete(2, 2);
        assert!(edge_stats(&g, &g).is_err());
    }

    #[test]
    fn expected_removed_degenerate_and_monotone() {
        // r = s = 1: degrees never exceed 1.
        let e = expected_removed_exact::<f64>(1, 1, 5).unwrap();
        assert_eq!(e.exact, 0.0);
        // Vanishes monotonically as k grows.
        let mut last = f64::INFINITY;
        for k in [2u64, 4, 16, 256, 65536] {
            let e = expected_removed_exact::<f64>(40, 60, k).unwrap();
            assert!(e.exact >= 0.0 && e.exact < last);
            assert!(e.exact <= e.bound * (1.0 + 1e-12));
            last = e.exact;
        }
        // Complete-graph case k = 1: every node has full degree.
        let e = expected_removed_exact::<f64>(3, 4, 1).unwrap();
        assert!((e.exact - (3.0 * 4.0 + 4.0 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn expected_removed_matches_direct_formula() {
        let e = expected_removed_exact::<f64>(1000, 1000, 100_000).unwrap();
        let x = 1000.0f64 / 100_000.0;
        let pow = (1.0 - 1.0 / 100_000.0f64).powi(999);
        let direct = 2.0 * 1000.0 * (x - x * pow);
        // powi and the exp/ln_1p route agree to ~1e-13 on the power itself;
        // the 1 - pow cancellation amplifies that by about pow/(1-pow).
        assert!((e.exact - direct).abs() < 1e-10 * direct);
        assert!((e.bound - 0.2).abs() < 1e-15);
    }
}
