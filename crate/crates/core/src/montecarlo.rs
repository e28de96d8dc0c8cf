//! Reproducible Monte Carlo experiments.
//!
//! Trial `t` of an experiment draws from `RngStream(master_seed, t)`, so the
//! per-trial statistics do not depend on scheduling. Statistics are integers;
//! sums are accumulated in 128-bit integers, so aggregation is exact and
//! order-independent and a summary is bit-identical for a fixed seed
//! regardless of the worker count.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{johansson_limit, odb_limit};
use crate::error::{Error, Result};
use crate::models::{
    sample_bernoulli_matrix, sample_binomial_graph, sample_geometric_grid, sample_word_pair,
    weights_to_graph, RngStream, WordPair,
};
use crate::solvers::{lcs_length_sparse, lis_length, max_weight_planar, odb_height, planar_matching_size};
use crate::Scalar;

/// Default ceiling on materialized cells / expected matches per trial.
pub const DEFAULT_CELL_LIMIT: u64 = 100_000_000;

fn default_tail_epsilons() -> Vec<Scalar> {
    vec![0.05, 0.1, 0.2]
}

/// The random model an experiment samples from. Each model fixes the
/// statistic computed per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    /// Word pair over a k-ary alphabet; statistic `L` via the sparse LCS.
    Words { r: u32, s: u32, k: u32 },
    /// Independent edges with probability p; statistic `L`.
    Binomial { r: u32, s: u32, p: Scalar },
    /// Geometric weights; statistic `weightedL` (maximum-weight planar matching).
    Geometric { n: u32, p: Scalar },
    /// Bernoulli 0/1 matrix; statistic `height` (weak-column variant).
    Odb { n: u32, p: Scalar },
    /// Uniform permutation via Fisher-Yates; statistic `LIS`.
    Permutation { n: u64 },
}

impl Model {
    pub fn statistic(&self) -> &'static str {
        match self {
            Model::Words { .. } | Model::Binomial { .. } => "L",
            Model::Geometric { .. } => "weightedL",
            Model::Odb { .. } => "height",
            Model::Permutation { .. } => "LIS",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Model::Words { r, s, k } => {
                if r == 0 || s == 0 || k == 0 {
                    return Err(Error::param("r/s/k", "must all be at least 1"));
                }
            }
            Model::Binomial { r, s, p } => {
                if r == 0 || s == 0 {
                    return Err(Error::param("r/s", "must be at least 1"));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::param("p", format!("{p} outside [0, 1]")));
                }
            }
            Model::Geometric { n, p } => {
                if n == 0 {
                    return Err(Error::param("n", "must be at least 1"));
                }
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::param("p", format!("{p} outside (0, 1)")));
                }
            }
            Model::Odb { n, p } => {
                if n == 0 {
                    return Err(Error::param("n", "must be at least 1"));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::param("p", format!("{p} outside [0, 1]")));
                }
            }
            Model::Permutation { n } => {
                if n == 0 {
                    return Err(Error::param("n", "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// Centering used by the empirical tail table.
    pub fn center(&self) -> Scalar {
        match *self {
            Model::Words { r, s, k } => 2.0 * (r as f64 * s as f64 / k as f64).sqrt(),
            Model::Binomial { r, s, p } => 2.0 * (r as f64 * s as f64 * p).sqrt(),
            Model::Geometric { n, p } => n as f64 * johansson_limit::<f64>(p).expect("validated"),
            Model::Odb { n, p } => n as f64 * odb_limit::<f64>(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)).expect("validated").value,
            Model::Permutation { n } => 2.0 * (n as f64).sqrt(),
        }
    }

    /// Normalized statistic: mean over the centering for the matching-size
    /// models and the permutation model, mean over n for the weighted and
    /// height models (reported against their growth limits).
    pub fn normalized(&self, mean: Scalar) -> Scalar {
        match *self {
            Model::Words { .. } | Model::Binomial { .. } | Model::Permutation { .. } => {
                let center = self.center();
                if center > 0.0 {
                    mean / center
                } else {
                    0.0
                }
            }
            Model::Geometric { n, .. } | Model::Odb { n, .. } => mean / n as f64,
        }
    }

    /// Reject configurations whose materialized state or expected work per
    /// trial exceeds the cell limit. Word experiments always run the sparse
    /// solver, so their cost is the expected number of matches, not `r * s`.
    fn guard(&self, cell_limit: u64) -> Result<()> {
        let cost: u64 = match *self {
            Model::Words { r, s, k } => {
                let matches = (r as u64 * s as u64) / k as u64;
                matches.max(r as u64 + s as u64)
            }
            Model::Binomial { r, s, p } => ((r as u64 * s as u64) as f64 * p).ceil() as u64,
            Model::Geometric { n, .. } | Model::Odb { n, .. } => n as u64 * n as u64,
            Model::Permutation { n } => n,
        };
        if cost > cell_limit {
            return Err(Error::ResourceGuard(format!(
                "estimated {cost} cells per trial exceeds the limit {cell_limit}"
            )));
        }
        Ok(())
    }
}

/// Experiment description. `workers`, `retain_trials`, and `cell_limit` are
/// execution details and are excluded from the serialized echo, so summaries
/// are byte-identical across worker counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub model: Model,
    pub trials: u64,
    pub master_seed: u64,
    /// Relative tail thresholds; absolute thresholds are `epsilon * center`.
    pub tail_epsilons: Vec<Scalar>,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub retain_trials: bool,
    #[serde(skip)]
    pub cell_limit: u64,
}

impl ExperimentConfig {
    pub fn new(model: Model, trials: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            model,
            trials,
            master_seed,
            tail_epsilons: default_tail_epsilons(),
            workers: 1,
            retain_trials: false,
            cell_limit: DEFAULT_CELL_LIMIT,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::param("workers", "must be at least 1"));
        }
        if self.tail_epsilons.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::param("tail_epsilons", "must be nonnegative"));
        }
        self.model.guard(self.cell_limit)
    }
}

/// One row of an empirical tail table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEntry {
    pub threshold: Scalar,
    /// Exact count of trials with `|value - center| >= threshold`.
    pub count: u64,
    pub frequency: Scalar,
}

/// Frequency of `|v - center| >= threshold` for each threshold, with exact
/// counts alongside the float frequencies.
pub fn empirical_tail(values: &[u64], center: Scalar, thresholds: &[Scalar]) -> Result<Vec<TailEntry>> {
    if values.is_empty() {
        return Err(Error::param("values", "must be nonempty"));
    }
    Ok(thresholds
        .iter()
        .map(|&th| {
            let count = values
                .iter()
                .filter(|&&v| (v as f64 - center).abs() >= th)
                .count() as u64;
            TailEntry {
                threshold: th,
                count,
                frequency: count as f64 / values.len() as f64,
            }
        })
        .collect())
}

/// Per-experiment aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub config: ExperimentConfig,
    pub statistic: &'static str,
    pub trials: u64,
    pub mean: Scalar,
    /// Unbiased sample variance.
    pub variance: Scalar,
    pub std_error: Scalar,
    pub median: Scalar,
    pub min: u64,
    pub max: u64,
    pub center: Scalar,
    pub normalized: Scalar,
    pub tails: Vec<TailEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_trial: Option<Vec<u64>>,
}

fn trial_value(model: &Model, master_seed: u64, trial: u64) -> u64 {
    let stream = RngStream::new(master_seed, trial);
    match *model {
        Model::Words { r, s, k } => {
            let w = sample_word_pair(r, s, k, stream).expect("validated");
            lcs_length_sparse(&w) as u64
        }
        Model::Binomial { r, s, p } => {
            let g = sample_binomial_graph(r, s, p, stream).expect("validated");
            planar_matching_size(&g) as u64
        }
        Model::Geometric { n, p } => {
            let g = sample_geometric_grid(n, p, stream).expect("validated");
            max_weight_planar(&g)
        }
        Model::Odb { n, p } => {
            let m = sample_bernoulli_matrix(n, p, stream).expect("validated");
            odb_height(&m) as u64
        }
        Model::Permutation { n } => {
            let mut perm: Vec<u64> = (1..=n).collect();
            perm.shuffle(&mut stream.rng());
            lis_length(&perm) as u64
        }
    }
}

fn collect_values(cfg: &ExperimentConfig) -> Result<Vec<u64>> {
    let model = cfg.model;
    let seed = cfg.master_seed;
    if cfg.workers == 1 {
        Ok((0..cfg.trials).map(|t| trial_value(&model, seed, t)).collect())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::invalid("worker pool", e.to_string()))?;
        Ok(pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| trial_value(&model, seed, t))
                .collect()
        }))
    }
}

fn summarize(cfg: &ExperimentConfig, values: Vec<u64>) -> EstimateSummary {
    let trials = values.len() as u64;
    let sum: u128 = values.iter().map(|&v| v as u128).sum();
    let sum_sq: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
    let mean = sum as f64 / trials as f64;
    let variance = if trials > 1 {
        // n * sum(x^2) - sum(x)^2 is exact in u128 and never negative.
        let numer = trials as u128 * sum_sq - sum * sum;
        numer as f64 / (trials as f64 * (trials - 1) as f64)
    } else {
        0.0
    };
    let std_error = (variance / trials as f64).sqrt();
    let mut sorted = values.clone();
    sorted.sort_unstable();
    let median = if trials % 2 == 1 {
        sorted[trials as usize / 2] as f64
    } else {
        (sorted[trials as usize / 2 - 1] as f64 + sorted[trials as usize / 2] as f64) / 2.0
    };
    let min = sorted[0];
    let max = sorted[trials as usize - 1];
    let center = cfg.model.center();
    let abs_thresholds: Vec<f64> = cfg.tail_epsilons.iter().map(|&e| e * center).collect();
    let tails = empirical_tail(&values, center, &abs_thresholds).expect("nonempty");
    EstimateSummary {
        config: cfg.clone(),
        statistic: cfg.model.statistic(),
        trials,
        mean,
        variance,
        std_error,
        median,
        min,
        max,
        center,
        normalized: cfg.model.normalized(mean),
        tails,
        per_trial: cfg.retain_trials.then_some(values),
    }
}

/// Run an experiment. Aggregates are exact functions of the per-trial values,
/// and trial `t` is drawn from `RngStream(master_seed, t)`, so the result is
/// bit-identical for a fixed config regardless of worker count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EstimateSummary> {
    cfg.validate()?;
    let values = collect_values(cfg)?;
    Ok(summarize(cfg, values))
}

/// Uniform random permutations of `{1..n}`; statistic LIS, normalized by
/// `2 sqrt(n)`.
pub fn permutation_lis_experiment(n: u64, trials: u64, master_seed: u64) -> Result<EstimateSummary> {
    run_experiment(&ExperimentConfig::new(Model::Permutation { n }, trials, master_seed))
}

/// Result of the diagonal-split experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitReport {
    pub n: u32,
    pub k: u32,
    pub q: u32,
    /// Sub-block side `floor(n / q)`.
    pub n_tilde: u32,
    pub trials: u64,
    pub mean_whole: Scalar,
    pub mean_block_sum: Scalar,
    /// Trials where the whole-graph value fell below the block sum;
    /// any nonzero count indicates a solver bug.
    pub violations: u64,
}

/// Sample a words instance, split both classes into `q` diagonal sub-blocks
/// of side `floor(n / q)`, and verify `L(G) >= sum_i L(G_i)` pathwise, while
/// reporting both sides' means.
pub fn split_experiment(n: u32, k: u32, q: u32, trials: u64, master_seed: u64) -> Result<SplitReport> {
    if n == 0 || k == 0 || trials == 0 {
        return Err(Error::param("n/k/trials", "must all be at least 1"));
    }
    if q == 0 || q > n {
        return Err(Error::param("q", format!("{q} outside 1..={n}")));
    }
    let n_tilde = n / q;
    let mut whole_sum: u128 = 0;
    let mut blocks_sum: u128 = 0;
    let mut violations = 0u64;
    for t in 0..trials {
        let w = sample_word_pair(n, n, k, RngStream::new(master_seed, t))?;
        let whole = lcs_length_sparse(&w) as u64;
        let mut block_total = 0u64;
        for i in 0..q {
            let lo = (i * n_tilde) as usize;
            let hi = lo + n_tilde as usize;
            // The induced diagonal subgraph of a words graph is the match
            // graph of the corresponding subwords.
            let sub = WordPair::new(
                k,
                w.word_a()[lo..hi].to_vec(),
                w.word_b()[lo..hi].to_vec(),
            )?;
            block_total += lcs_length_sparse(&sub) as u64;
        }
        if whole < block_total {
            violations += 1;
        }
        whole_sum += whole as u128;
        blocks_sum += block_total as u128;
    }
    Ok(SplitReport {
        n,
        k,
        q,
        n_tilde,
        trials,
        mean_whole: whole_sum as f64 / trials as f64,
        mean_block_sum: blocks_sum as f64 / trials as f64,
        violations,
    })
}

/// Result of the shared-randomness coupling experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub n: u32,
    pub p: Scalar,
    pub trials: u64,
    /// Mean planar-matching size of the nonzero-weight graph.
    pub mean_cardinality: Scalar,
    /// Mean maximum-weight planar matching of the same grid.
    pub mean_weight: Scalar,
    /// Trials where cardinality exceeded the weighted maximum; any nonzero
    /// count indicates a solver bug.
    pub violations: u64,
    /// Reference growth limit for the weighted statistic, per node.
    pub johansson_limit: Scalar,
}

/// Per trial, draw one geometric-weight grid; compute the planar-matching
/// size of its nonzero-weight graph and the maximum-weight planar matching
/// of the grid, asserting cardinality <= weight pathwise (every kept edge
/// has weight at least 1).
pub fn coupling_experiment(n: u32, p: Scalar, trials: u64, master_seed: u64) -> Result<CouplingReport> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let limit = johansson_limit::<f64>(p)?;
    let mut card_sum: u128 = 0;
    let mut weight_sum: u128 = 0;
    let mut violations = 0u64;
    for t in 0..trials {
        let grid = sample_geometric_grid(n, p, RngStream::new(master_seed, t))?;
        let coupled = weights_to_graph(&grid);
        let card = planar_matching_size(&coupled) as u64;
        let weight = max_weight_planar(&grid);
        if card > weight {
            violations += 1;
        }
        card_sum += card as u128;
        weight_sum += weight as u128;
    }
    Ok(CouplingReport {
        n,
        p,
        trials,
        mean_cardinality: card_sum as f64 / trials as f64,
        mean_weight: weight_sum as f64 / trials as f64,
        violations,
        johansson_limit: limit,
    })
}

/// One row of a subadditivity profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub n: u32,
    pub mean: Scalar,
    pub std_error: Scalar,
    /// Normalized expectation estimate, mean / n.
    pub ratio: Scalar,
    pub ratio_se: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub k: u32,
    pub trials: u64,
    pub points: Vec<ProfilePoint>,
    /// Whether consecutive ratios are nondecreasing within two combined
    /// standard errors. The exact expectation sequence is monotone; the
    /// estimates are only required to be monotone up to this slack.
    pub monotone_within_2se: bool,
}

/// Estimate `E[L] / n` for words instances along an increasing grid of sizes
/// and report the monotone-within-2SE diagnostic.
pub fn subadditive_profile(k: u32, n_grid: &[u32], trials: u64, master_seed: u64) -> Result<ProfileReport> {
    if n_grid.is_empty() {
        return Err(Error::param("n_grid", "must be nonempty"));
    }
    if !n_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::param("n_grid", "must be strictly increasing"));
    }
    let mut points = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        let cfg = ExperimentConfig::new(Model::Words { r: n, s: n, k }, trials, master_seed);
        // Disjoint stream blocks per grid point keep all draws independent.
        let summary = run_experiment_offset(&cfg, i as u64 * trials)?;
        points.push(ProfilePoint {
            n,
            mean: summary.mean,
            std_error: summary.std_error,
            ratio: summary.mean / n as f64,
            ratio_se: summary.std_error / n as f64,
        });
    }
    let monotone_within_2se = points.windows(2).all(|w| {
        let slack = 2.0 * (w[0].ratio_se.powi(2) + w[1].ratio_se.powi(2)).sqrt();
        w[1].ratio >= w[0].ratio - slack
    });
    Ok(ProfileReport {
        k,
        trials,
        points,
        monotone_within_2se,
    })
}

fn run_experiment_offset(cfg: &ExperimentConfig, offset: u64) -> Result<EstimateSummary> {
    cfg.validate()?;
    let model = cfg.model;
    let seed = cfg.master_seed;
    let values: Vec<u64> = (0..cfg.trials)
        .map(|t| trial_value(&model, seed, offset + t))
        .collect();
    Ok(summarize(cfg, values))
}

/// Serialize with floats rounded to 12 significant digits and keys sorted;
/// exact integer counts stay integers. Used for stable, comparable output.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("serializable");
    round_floats(&mut v);
    v.to_string()
}

fn round_floats(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if !n.is_i64() && !n.is_u64() {
                if let Some(x) = n.as_f64() {
                    let rounded: f64 = format!("{x:.11e}").parse().expect("roundtrip");
                    if let Some(num) = serde_json::Number::from_f64(rounded) {
                        *n = num;
                    }
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_floats),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// One JSONL line per retained trial: `{"trial": t, "value": v}`.
pub fn trials_jsonl(summary: &EstimateSummary) -> Option<String> {
    summary.per_trial.as_ref().map(|values| {
        let mut out = String::new();
        for (t, v) in values.iter().enumerate() {
            out.push_str(&format!("{{\"trial\":{t},\"value\":{v}}}\n"));
        }
        out
    })
}
