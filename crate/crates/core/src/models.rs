//! Random models over ordered bipartite structures, with deterministic
//! per-trial randomness.
//!
//! Every sampler takes an [`RngStream`]: the stream derived from a
//! `(master_seed, trial_index)` pair is identical across runs, platforms, and
//! scheduling orders, so experiments may compute trials in any order (or
//! concurrently) and still reproduce bit-identical results.

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A counter-based random stream addressed by `(master_seed, trial_index)`.
///
/// Internally this is a ChaCha cipher keyed by the master seed, with the
/// trial index selecting the cipher stream and the draw counter advancing the
/// cipher's block counter. Distinct trials therefore get independent streams
/// whose contents do not depend on evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        RngStream {
            master_seed,
            trial_index,
        }
    }

    /// Instantiate the generator positioned at draw 0 of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.trial_index);
        rng
    }
}

/// An edge set over two totally ordered color classes `A = {1..r}` and
/// `B = {1..s}`. Edges are stored sorted lexicographically with duplicates
/// forbidden; the solvers rely on that ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedBipartiteGraph {
    r: u32,
    s: u32,
    edges: Vec<(u32, u32)>,
}

impl OrderedBipartiteGraph {
    /// Build a graph, validating ranges and strict lexicographic order.
    pub fn new(r: u32, s: u32, edges: Vec<(u32, u32)>) -> Result<Self> {
        if r == 0 || s == 0 {
            return Err(Error::param("r/s", "color classes must be nonempty"));
        }
        for &(a, b) in &edges {
            if a < 1 || a > r || b < 1 || b > s {
                return Err(Error::invalid(
                    "graph",
                    format!("edge ({a},{b}) out of range for r={r}, s={s}"),
                ));
            }
        }
        if !edges.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid(
                "graph",
                "edge list must be strictly sorted lexicographically",
            ));
        }
        Ok(OrderedBipartiteGraph { r, s, edges })
    }

    /// Caller guarantees range and strict lexicographic order.
    pub(crate) fn new_unchecked(r: u32, s: u32, edges: Vec<(u32, u32)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges
            .iter()
            .all(|&(a, b)| (1..=r).contains(&a) && (1..=s).contains(&b)));
        OrderedBipartiteGraph { r, s, edges }
    }

    /// The complete graph on `r + s` nodes.
    pub fn complete(r: u32, s: u32) -> Self {
        let edges = (1..=r)
            .flat_map(|a| (1..=s).map(move |b| (a, b)))
            .collect();
        OrderedBipartiteGraph { r, s, edges }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Two words over the alphabet `{1..k}`; the generator of the random-words
/// graph via [`words_to_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordPair {
    k: u32,
    word_a: Vec<u32>,
    word_b: Vec<u32>,
}

impl WordPair {
    pub fn new(k: u32, word_a: Vec<u32>, word_b: Vec<u32>) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", "alphabet must be nonempty"));
        }
        if word_a.is_empty() || word_b.is_empty() {
            return Err(Error::param("words", "words must be nonempty"));
        }
        let in_range = |w: &[u32]| w.iter().all(|&c| (1..=k).contains(&c));
        if !in_range(&word_a) || !in_range(&word_b) {
            return Err(Error::invalid("word pair", "character outside {1..k}"));
        }
        Ok(WordPair { k, word_a, word_b })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn word_a(&self) -> &[u32] {
        &self.word_a
    }

    pub fn word_b(&self) -> &[u32] {
        &self.word_b
    }
}

/// A square grid of nonnegative integer weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGrid {
    n: u32,
    weights: Vec<u64>, // row-major, n*n entries
}

impl WeightedGrid {
    pub fn new(n: u32, weights: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "side length must be positive"));
        }
        if weights.len() != (n as usize) * (n as usize) {
            return Err(Error::invalid(
                "grid",
                format!("expected {} weights, got {}", n as u64 * n as u64, weights.len()),
            ));
        }
        Ok(WeightedGrid { n, weights })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Weight of cell `(row, col)`, 0-based.
    pub fn weight(&self, row: usize, col: usize) -> u64 {
        self.weights[row * self.n as usize + col]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }
}

/// A square 0/1 matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BernoulliMatrix {
    n: u32,
    entries: Vec<bool>, // row-major
}

impl BernoulliMatrix {
    pub fn new(n: u32, entries: Vec<bool>) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "side length must be positive"));
        }
        if entries.len() != (n as usize) * (n as usize) {
            return Err(Error::invalid(
                "matrix",
                format!("expected {} entries, got {}", n as u64 * n as u64, entries.len()),
            ));
        }
        Ok(BernoulliMatrix { n, entries })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.entries[row * self.n as usize + col]
    }

    /// The graph whose edges are the 1-cells (row -> class A, col -> class B).
    pub fn to_graph(&self) -> OrderedBipartiteGraph {
        let n = self.n as usize;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.entries[i * n + j] {
                    edges.push((i as u32 + 1, j as u32 + 1));
                }
            }
        }
        OrderedBipartiteGraph::new_unchecked(self.n, self.n, edges)
    }
}

/// Sample two words of lengths `r` and `s` with i.i.d. uniform characters
/// from `{1..k}`.
pub fn sample_word_pair(r: u32, s: u32, k: u32, stream: RngStream) -> Result<WordPair> {
    if r == 0 || s == 0 || k == 0 {
        return Err(Error::param("r/s/k", "r, s, k must all be at least 1"));
    }
    let mut rng = stream.rng();
    let word_a = (0..r).map(|_| rng.random_range(1..=k)).collect();
    let word_b = (0..s).map(|_| rng.random_range(1..=k)).collect();
    Ok(WordPair { k, word_a, word_b })
}

/// The match graph of a word pair: edge `(a, b)` present iff
/// `word_a[a] == word_b[b]`. Only disjoint unions of complete bipartite
/// graphs can occur, so two A-nodes with equal characters have identical
/// neighborhoods.
pub fn words_to_graph(w: &WordPair) -> OrderedBipartiteGraph {
    // Positions of word_b keyed by character, sorted by (character, position).
    let mut by_char: Vec<(u32, u32)> = w
        .word_b
        .iter()
        .enumerate()
        .map(|(j, &c)| (c, j as u32 + 1))
        .collect();
    by_char.sort_unstable();

    let mut edges = Vec::new();
    for (i, &c) in w.word_a.iter().enumerate() {
        let lo = by_char.partition_point(|&(cc, _)| cc < c);
        let hi = by_char.partition_point(|&(cc, _)| cc <= c);
        for &(_, j) in &by_char[lo..hi] {
            edges.push((i as u32 + 1, j));
        }
    }
    OrderedBipartiteGraph::new_unchecked(w.word_a.len() as u32, w.word_b.len() as u32, edges)
}

/// Sample the binomial model: each of the `r*s` edges present independently
/// with probability `p`. Uses geometric index skipping, which draws exactly
/// the same distribution as per-edge coin flips.
pub fn sample_binomial_graph(r: u32, s: u32, p: f64, stream: RngStream) -> Result<OrderedBipartiteGraph> {
    if r == 0 || s == 0 {
        return Err(Error::param("r/s", "color classes must be nonempty"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", format!("{p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(OrderedBipartiteGraph::new_unchecked(r, s, Vec::new()));
    }
    if p == 1.0 {
        return Ok(OrderedBipartiteGraph::complete(r, s));
    }

    let total = r as u64 * s as u64;
    let mut rng = stream.rng();
    let ln_q = (-p).ln_1p(); // ln(1 - p) < 0
    let mut edges = Vec::new();
    let mut pos: u64 = 0;
    loop {
        // Number of skipped positions before the next present edge is
        // geometric on {0, 1, ...} with success probability p.
        let u = 1.0 - rng.random::<f64>(); // (0, 1]
        let gap = (u.ln() / ln_q).floor();
        if !gap.is_finite() || gap >= (u64::MAX / 2) as f64 {
            break;
        }
        let gap = gap as u64;
        if gap >= total - pos {
            break;
        }
        pos += gap;
        edges.push(((pos / s as u64) as u32 + 1, (pos % s as u64) as u32 + 1));
        pos += 1;
        if pos >= total {
            break;
        }
    }
    Ok(OrderedBipartiteGraph::new_unchecked(r, s, edges))
}

/// Sample an `n x n` grid of i.i.d. weights with `P(w = j) = (1-p)^j * p`
/// for `j >= 0`, via the inverse CDF `w = floor(ln(U) / ln(1-p))`.
pub fn sample_geometric_grid(n: u32, p: f64, stream: RngStream) -> Result<WeightedGrid> {
    if n == 0 {
        return Err(Error::param("n", "side length must be positive"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("{p} outside (0, 1)")));
    }
    let mut rng = stream.rng();
    let ln_q = (-p).ln_1p();
    let cells = n as usize * n as usize;
    let weights = (0..cells)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>(); // (0, 1]
            (u.ln() / ln_q).floor() as u64
        })
        .collect();
    Ok(WeightedGrid { n, weights })
}

/// Keep exactly the cells of nonzero weight as edges.
///
/// Note the parametrization: a weight is zero with probability `p`, so the
/// kept-edge graph is a binomial graph with edge probability `1 - p` (not
/// `p`). Callers pairing this with [`sample_binomial_graph`] must match the
/// parameters accordingly.
pub fn weights_to_graph(g: &WeightedGrid) -> OrderedBipartiteGraph {
    let n = g.n as usize;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if g.weights[i * n + j] > 0 {
                edges.push((i as u32 + 1, j as u32 + 1));
            }
        }
    }
    OrderedBipartiteGraph::new_unchecked(g.n, g.n, edges)
}

/// Sample an `n x n` 0/1 matrix with i.i.d. Bernoulli(p) entries.
pub fn sample_bernoulli_matrix(n: u32, p: f64, stream: RngStream) -> Result<BernoulliMatrix> {
    if n == 0 {
        return Err(Error::param("n", "side length must be positive"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", format!("{p} outside [0, 1]")));
    }
    let dist = Bernoulli::new(p).expect("p validated");
    let mut rng = stream.rng();
    let cells = n as usize * n as usize;
    let entries = (0..cells).map(|_| dist.sample(&mut rng)).collect();
    Ok(BernoulliMatrix { n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(t: u64) -> RngStream {
        RngStream::new(0x5eed_cafe, t)
    }

    #[test]
    fn word_pair_single_letter_alphabet() {
        let w = sample_word_pair(3, 3, 1, stream(0)).unwrap();
        assert_eq!(w.word_a(), &[1, 1, 1]);
        assert_eq!(w.word_b(), &[1, 1, 1]);
    }

    #[test]
    fn word_pair_rejects_zero_params() {
        assert!(sample_word_pair(0, 3, 2, stream(0)).is_err());
        assert!(sample_word_pair(3, 0, 2, stream(0)).is_err());
        assert!(sample_word_pair(3, 3, 0, stream(0)).is_err());
    }

    #[test]
    fn word_pair_deterministic() {
        let w1 = sample_word_pair(100, 90, 7, stream(3)).unwrap();
        let w2 = sample_word_pair(100, 90, 7, stream(3)).unwrap();
        assert_eq!(w1, w2);
        let w3 = sample_word_pair(100, 90, 7, stream(4)).unwrap();
        assert_ne!(w1, w3);
    }

    #[test]
    fn word_pair_character_frequencies() {
        // k = 4, n = 10^4: each character count is Binomial(n, 1/4) with
        // sigma = sqrt(n * 1/4 * 3/4) ~ 43.3; require 5 sigma.
        let n = 10_000u32;
        let w = sample_word_pair(n, n, 4, stream(11)).unwrap();
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for word in [w.word_a(), w.word_b()] {
            let mut counts = [0u32; 5];
            for &c in word {
                counts[c as usize] += 1;
            }
            for (c, &count) in counts.iter().enumerate().skip(1) {
                let dev = (count as f64 - 2500.0).abs();
                assert!(dev < 5.0 * sigma, "char {c} count {count} off");
            }
        }
    }

    #[test]
    fn words_to_graph_hand_cases() {
        let w = WordPair::new(2, vec![1, 2], vec![2, 1]).unwrap();
        assert_eq!(words_to_graph(&w).edges(), &[(1, 2), (2, 1)]);

        let w = WordPair::new(1, vec![1, 1], vec![1, 1]).unwrap();
        assert_eq!(
            words_to_graph(&w).edges(),
            &[(1, 1), (1, 2), (2, 1), (2, 2)]
        );
    }

    #[test]
    fn words_graph_edge_count_concentrates() {
        // |E| has mean rs/k and variance (rs/k)(1 - 1/k) in the words model.
        let w = sample_word_pair(1000, 1000, 100, stream(17)).unwrap();
        let g = words_to_graph(&w);
        let mean = 1000.0 * 1000.0 / 100.0;
        let sigma = (mean * (1.0 - 1.0 / 100.0_f64)).sqrt();
        let dev = (g.edge_count() as f64 - mean).abs();
        assert!(dev < 5.0 * sigma, "|E| = {}", g.edge_count());
    }

    #[test]
    fn words_graph_equal_characters_share_neighborhoods() {
        let w = sample_word_pair(40, 40, 3, stream(23)).unwrap();
        let g = words_to_graph(&w);
        let nbhd = |a: u32| -> Vec<u32> {
            g.edges()
                .iter()
                .filter(|&&(x, _)| x == a)
                .map(|&(_, b)| b)
                .collect()
        };
        for a1 in 0..40usize {
            for a2 in (a1 + 1)..40usize {
                if w.word_a()[a1] == w.word_a()[a2] {
                    assert_eq!(nbhd(a1 as u32 + 1), nbhd(a2 as u32 + 1));
                }
            }
        }
    }

    #[test]
    fn binomial_graph_extremes() {
        let g = sample_binomial_graph(5, 7, 0.0, stream(0)).unwrap();
        assert!(g.edges().is_empty());
        let g = sample_binomial_graph(5, 7, 1.0, stream(0)).unwrap();
        assert_eq!(g.edge_count(), 35);
        assert!(sample_binomial_graph(5, 7, -0.1, stream(0)).is_err());
        assert!(sample_binomial_graph(5, 7, 1.1, stream(0)).is_err());
    }

    #[test]
    fn binomial_graph_mean_edge_count() {
        // r = s = 2000, p = 1e-3: |E| per trial is Binomial(4e6, 1e-3);
        // the mean over 10^4 trials has sigma = sqrt(4e6 * p * (1-p)) / 100.
        let trials = 10_000u64;
        let mut total = 0u64;
        for t in 0..trials {
            let g = sample_binomial_graph(2000, 2000, 0.001, stream(t)).unwrap();
            total += g.edge_count() as u64;
        }
        let mean = total as f64 / trials as f64;
        let sigma_mean = (4.0e6_f64 * 0.001 * 0.999).sqrt() / (trials as f64).sqrt();
        assert!(
            (mean - 4000.0).abs() < 5.0 * sigma_mean,
            "mean |E| = {mean}, sigma = {sigma_mean}"
        );
    }

    #[test]
    fn binomial_graph_is_sorted_and_in_range() {
        let g = sample_binomial_graph(50, 37, 0.2, stream(5)).unwrap();
        assert!(g.edges().windows(2).all(|w| w[0] < w[1]));
        assert!(g
            .edges()
            .iter()
            .all(|&(a, b)| (1..=50).contains(&a) && (1..=37).contains(&b)));
    }

    #[test]
    fn geometric_grid_rejects_bad_p() {
        assert!(sample_geometric_grid(4, 0.0, stream(0)).is_err());
        assert!(sample_geometric_grid(4, 1.0, stream(0)).is_err());
    }

    #[test]
    fn geometric_grid_near_one_is_all_zero() {
        // P(any weight > 0) <= n^2 * (1 - p) = 10^4 * 1e-6 = 0.01.
        let g = sample_geometric_grid(100, 0.999999, stream(2)).unwrap();
        assert!(g.weights().iter().all(|&w| w == 0));
    }

    #[test]
    fn geometric_grid_moments() {
        // Mean (1-p)/p = 1 at p = 0.5, variance (1-p)/p^2 = 2, 10^6 draws.
        let g = sample_geometric_grid(1000, 0.5, stream(9)).unwrap();
        let n = g.weights().len() as f64;
        let mean = g.weights().iter().sum::<u64>() as f64 / n;
        let sigma_mean = (2.0f64).sqrt() / n.sqrt();
        assert!((mean - 1.0).abs() < 5.0 * sigma_mean, "mean = {mean}");

        // P(w > 0) = 1 - p = 0.7 at p = 0.3.
        let g = sample_geometric_grid(1000, 0.3, stream(10)).unwrap();
        let frac = g.weights().iter().filter(|&&w| w > 0).count() as f64 / n;
        let sigma = (0.3 * 0.7 / n).sqrt();
        assert!((frac - 0.7).abs() < 5.0 * sigma, "P(w>0) = {frac}");
    }

    #[test]
    fn weights_to_graph_extremes() {
        let g = WeightedGrid::new(3, vec![0; 9]).unwrap();
        assert!(weights_to_graph(&g).edges().is_empty());
        let g = WeightedGrid::new(2, vec![3, 1, 2, 9]).unwrap();
        assert_eq!(
            weights_to_graph(&g).edges(),
            &[(1, 1), (1, 2), (2, 1), (2, 2)]
        );
    }

    #[test]
    fn bernoulli_matrix_extremes_and_counts() {
        let m = sample_bernoulli_matrix(10, 0.0, stream(0)).unwrap();
        assert!((0..10).all(|i| (0..10).all(|j| !m.get(i, j))));
        let m = sample_bernoulli_matrix(10, 1.0, stream(0)).unwrap();
        assert!((0..10).all(|i| (0..10).all(|j| m.get(i, j))));
        assert!(sample_bernoulli_matrix(10, 2.0, stream(0)).is_err());

        let m = sample_bernoulli_matrix(1000, 0.3, stream(4)).unwrap();
        let ones: usize = (0..1000)
            .map(|i| (0..1000).filter(|&j| m.get(i, j)).count())
            .sum();
        let sigma = (1.0e6_f64 * 0.3 * 0.7).sqrt();
        assert!(
            (ones as f64 - 3.0e5).abs() < 5.0 * sigma,
            "ones = {ones}"
        );
    }

    #[test]
    fn samplers_deterministic_per_stream() {
        let s = stream(42);
        assert_eq!(
            sample_binomial_graph(30, 30, 0.1, s).unwrap(),
            sample_binomial_graph(30, 30, 0.1, s).unwrap()
        );
        assert_eq!(
            sample_geometric_grid(20, 0.4, s).unwrap(),
            sample_geometric_grid(20, 0.4, s).unwrap()
        );
        assert_eq!(
            sample_bernoulli_matrix(20, 0.4, s).unwrap(),
            sample_bernoulli_matrix(20, 0.4, s).unwrap()
        );
    }

    #[test]
    fn graph_constructor_validates() {
        assert!(OrderedBipartiteGraph::new(2, 2, vec![(1, 1), (1, 1)]).is_err());
        assert!(OrderedBipartiteGraph::new(2, 2, vec![(2, 1), (1, 1)]).is_err());
        assert!(OrderedBipartiteGraph::new(2, 2, vec![(3, 1)]).is_err());
        assert!(OrderedBipartiteGraph::new(2, 2, vec![(1, 1), (2, 2)]).is_ok());
    }
}
