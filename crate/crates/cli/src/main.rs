//! Command-line surface: experiment presets, config loading, result emission
//! for plots, and bound/partition inspection.
//!
//! Exit codes: 0 success, 2 invalid flags or domain violations, 3 resource
//! guard. Flags override a `--config` JSON file, which overrides the built-in
//! presets. All floats are emitted with 12 significant digits; integer counts
//! stay integers. `MATCHLAB_WORKERS` sets the default worker count.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use matchlab::blocks::{build_block_partition, classify_and_enlarge, type_of};
use matchlab::bounds::{
    block_parameters, chebyshev_indicator_bound, composition_parameters, concentration_tail_form,
    johansson_limit, lis_tail_lower, lis_tail_upper, m_lower, m_upper, odb_limit,
    sandwich_regime_check, sandwich_tail_lower, sandwich_tail_upper, type_count_log_bound,
    RegimeSide, TailModel,
};
use matchlab::models::{sample_word_pair, words_to_graph, RngStream};
use matchlab::montecarlo::{
    canonical_json, run_experiment, trials_jsonl, EstimateSummary, ExperimentConfig, Model,
};
use matchlab::solvers::{planar_matching_recover, planar_matching_size};
use matchlab::Error;

#[derive(Parser)]
#[command(name = "matchlab", version, about = "Planar-matching experiment lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one Monte Carlo experiment and emit a JSON summary.
    Estimate(EstimateArgs),
    /// Sweep a list of k (or p) values at a fixed ratio and emit CSV.
    Sweep(SweepArgs),
    /// Sample one words instance, recover a maximum planar matching, and
    /// print its block partition.
    Blocks(BlocksArgs),
    /// Evaluate a closed-form bound or limit.
    Bounds {
        #[command(subcommand)]
        which: BoundsCommand,
    },
}

#[derive(Args, Clone)]
struct EstimateArgs {
    /// words | binomial | geometric | odb | permutation
    #[arg(long)]
    model: Option<String>,
    /// Shorthand for r = s = n (words/binomial); side length otherwise.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    s: Option<u32>,
    /// Alphabet size (words model).
    #[arg(long)]
    k: Option<u32>,
    /// Probability parameter (binomial/geometric/odb models).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Write the JSON summary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one JSONL record per trial to this path.
    #[arg(long)]
    retain_trials: Option<PathBuf>,
    /// Comma-separated relative tail thresholds.
    #[arg(long, value_delimiter = ',')]
    tail_epsilons: Option<Vec<f64>>,
    #[arg(long)]
    cell_limit: Option<u64>,
    /// Suppress the timestamp field for byte-identical reruns.
    #[arg(long)]
    deterministic: bool,
    /// JSON file with any of the estimate fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<String>,
    n: Option<u64>,
    r: Option<u32>,
    s: Option<u32>,
    k: Option<u32>,
    p: Option<f64>,
    trials: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
    tail_epsilons: Option<Vec<f64>>,
    cell_limit: Option<u64>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Alphabet sizes for a words sweep.
    #[arg(long, value_delimiter = ',')]
    k_list: Option<Vec<u32>>,
    /// Edge probabilities for a binomial sweep.
    #[arg(long, value_delimiter = ',')]
    p_list: Option<Vec<f64>>,
    /// Held fixed across the sweep: n / sqrt(k) for words, n sqrt(p) for
    /// binomial; n is derived per row.
    #[arg(long)]
    ratio: f64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    tail_epsilons: Option<Vec<f64>>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct BlocksArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    /// Used only for the n >= k^beta advisory flag.
    #[arg(long, default_value_t = 0.7)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone)]
enum BoundsCommand {
    /// 2 (1 + delta) sqrt(rs / k)
    MUpper(SandwichArgs),
    /// 2 (1 - delta) sqrt(rs / k)
    MLower(SandwichArgs),
    /// Check the density/spread preconditions of the sandwich tails.
    SandwichRegime {
        #[command(flatten)]
        base: SandwichArgs,
        #[arg(long, default_value_t = 25.0)]
        c: f64,
        /// upper | lower
        #[arg(long)]
        which: String,
    },
    /// Tail forms 2 exp(-t^2 / 8(m_u + t)) and 2 exp(-t^2 / 8 m_u).
    SandwichTail {
        #[command(flatten)]
        base: SandwichArgs,
        #[arg(long)]
        t: f64,
        /// upper | lower
        #[arg(long)]
        which: String,
    },
    /// LIS tail forms b1 exp(-c lambda^(3/5) n^(1/5)) / b1 exp(-c lambda^3 n).
    LisTail {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        b0: f64,
        #[arg(long, default_value_t = 1.0)]
        b1: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// upper | lower
        #[arg(long)]
        which: String,
    },
    /// Indicator-sum deviation bound (ex (1 - ex) + pair-sum) / t^2.
    Chebyshev {
        #[arg(long)]
        ex: f64,
        #[arg(long)]
        pair_sum: f64,
        #[arg(long)]
        t: f64,
    },
    /// 5 max_{q <= q_max} ln C(n, q) vs the closed form c1 (n/ell) ln ell.
    TypeCount {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        q_max: u64,
        #[arg(long, default_value_t = 5.0)]
        c1: f64,
    },
    /// Block-construction parameters (ell, e_max, m_max).
    BlockParams {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.6)]
        alpha: f64,
    },
    /// Sub-block side, implied accuracy, expectation floor, and gate check.
    CompositionParams {
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 40.0)]
        gate_c: f64,
    },
    /// exp(-c n / sqrt(k)) for words, exp(-c n sqrt(p)) for binomial.
    TailForm {
        /// words | binomial
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long)]
        c: f64,
    },
    /// (1 + sqrt(1 - p))^2 / p
    Johansson {
        #[arg(long)]
        p: f64,
    },
    /// 2 sqrt(p (1 - p)), flagged for p >= 1/2.
    OdbLimit {
        #[arg(long)]
        p: f64,
    },
}

#[derive(Args, Clone)]
struct SandwichArgs {
    #[arg(long)]
    r: u64,
    #[arg(long)]
    s: u64,
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ResourceGuard(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 2,
            message: format!("io error: {e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Blocks(args) => cmd_blocks(args),
        Command::Bounds { which } => cmd_bounds(which),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let kind = if f.code == 3 { "resource_guard" } else { "invalid_request" };
            eprintln!("{}", json!({ "error": f.message, "kind": kind }));
            ExitCode::from(f.code)
        }
    }
}

fn default_workers() -> usize {
    std::env::var("MATCHLAB_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(1)
}

fn build_model(
    name: &str,
    n: Option<u64>,
    r: Option<u32>,
    s: Option<u32>,
    k: Option<u32>,
    p: Option<f64>,
) -> Result<Model, Failure> {
    let n_u32 = || -> Result<u32, Failure> {
        let v = n.ok_or_else(|| Failure::invalid("--n is required for this model"))?;
        u32::try_from(v).map_err(|_| Failure::invalid("--n too large"))
    };
    let side = |which: &str, explicit: Option<u32>| -> Result<u32, Failure> {
        explicit
            .or(n.and_then(|v| u32::try_from(v).ok()))
            .ok_or_else(|| Failure::invalid(format!("--{which} (or --n) is required")))
    };
    match name {
        "words" => Ok(Model::Words {
            r: side("r", r)?,
            s: side("s", s)?,
            k: k.ok_or_else(|| Failure::invalid("--k is required for the words model"))?,
        }),
        "binomial" => Ok(Model::Binomial {
            r: side("r", r)?,
            s: side("s", s)?,
            p: p.ok_or_else(|| Failure::invalid("--p is required for the binomial model"))?,
        }),
        "geometric" => Ok(Model::Geometric {
            n: n_u32()?,
            p: p.ok_or_else(|| Failure::invalid("--p is required for the geometric model"))?,
        }),
        "odb" => Ok(Model::Odb {
            n: n_u32()?,
            p: p.ok_or_else(|| Failure::invalid("--p is required for the odb model"))?,
        }),
        "permutation" => Ok(Model::Permutation {
            n: n.ok_or_else(|| Failure::invalid("--n is required for the permutation model"))?,
        }),
        other => Err(Failure::invalid(format!(
            "unknown model `{other}` (expected words|binomial|geometric|odb|permutation)"
        ))),
    }
}

fn timestamped(summary: &EstimateSummary, deterministic: bool) -> Value {
    let mut v: Value = serde_json::from_str(&canonical_json(summary)).expect("valid json");
    if !deterministic {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        v.as_object_mut()
            .expect("object")
            .insert("timestamp".into(), json!(secs));
    }
    v
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let file: FileConfig = match &args.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Failure::invalid(format!("bad config file: {e}")))?,
        None => FileConfig::default(),
    };

    let model_name = args
        .model
        .or(file.model)
        .ok_or_else(|| Failure::invalid("--model is required"))?;
    let model = build_model(
        &model_name,
        args.n.or(file.n),
        args.r.or(file.r),
        args.s.or(file.s),
        args.k.or(file.k),
        args.p.or(file.p),
    )?;

    let mut cfg = ExperimentConfig::new(
        model,
        args.trials.or(file.trials).unwrap_or(100),
        args.seed.or(file.seed).unwrap_or(0),
    );
    cfg.workers = args.workers.or(file.workers).unwrap_or_else(default_workers);
    if let Some(eps) = args.tail_epsilons.or(file.tail_epsilons) {
        cfg.tail_epsilons = eps;
    }
    if let Some(limit) = args.cell_limit.or(file.cell_limit) {
        cfg.cell_limit = limit;
    }
    cfg.retain_trials = args.retain_trials.is_some();

    let summary = run_experiment(&cfg)?;
    if let Some(path) = &args.retain_trials {
        fs::write(path, trials_jsonl(&summary).expect("retention enabled"))?;
    }
    // The emitted summary omits the raw trial list; it lives in the JSONL.
    let mut public = summary.clone();
    public.per_trial = None;
    let value = timestamped(&public, args.deterministic);
    emit(
        &args.out,
        &format!("{}\n", serde_json::to_string_pretty(&value).expect("json")),
    )
}

fn fmt_sig(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("roundtrip");
    format!("{rounded}")
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    if !(args.ratio > 0.0) {
        return Err(Failure::invalid("--ratio must be positive"));
    }
    let epsilons = args.tail_epsilons.unwrap_or_else(|| vec![0.05, 0.1, 0.2]);
    let workers = args.workers.unwrap_or_else(default_workers);

    enum Sweep {
        K(Vec<u32>),
        P(Vec<f64>),
    }
    let sweep = match (args.k_list, args.p_list) {
        (Some(ks), None) => Sweep::K(ks),
        (None, Some(ps)) => Sweep::P(ps),
        _ => {
            return Err(Failure::invalid(
                "exactly one of --k-list and --p-list is required",
            ))
        }
    };

    let mut csv = String::new();
    let first_col = match sweep {
        Sweep::K(_) => "k",
        Sweep::P(_) => "p",
    };
    csv.push_str(&format!("{first_col},n,trials,mean,se,normalized"));
    for e in &epsilons {
        csv.push_str(&format!(",tail_{e}"));
    }
    csv.push('\n');

    let rows: Vec<(String, Model)> = match sweep {
        Sweep::K(ks) => ks
            .into_iter()
            .map(|k| {
                let n = (args.ratio * (k as f64).sqrt()).round();
                let n = u32::try_from(n as u64)
                    .map_err(|_| Failure::invalid(format!("derived n = {n} too large")))?;
                Ok((k.to_string(), Model::Words { r: n, s: n, k }))
            })
            .collect::<Result<_, Failure>>()?,
        Sweep::P(ps) => ps
            .into_iter()
            .map(|p| {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Failure::invalid(format!("p = {p} outside (0, 1]")));
                }
                let n = (args.ratio / p.sqrt()).round();
                let n = u32::try_from(n as u64)
                    .map_err(|_| Failure::invalid(format!("derived n = {n} too large")))?;
                Ok((fmt_sig(p), Model::Binomial { r: n, s: n, p }))
            })
            .collect::<Result<_, Failure>>()?,
    };

    for (label, model) in rows {
        let mut cfg = ExperimentConfig::new(model, args.trials, args.seed);
        cfg.workers = workers;
        cfg.tail_epsilons = epsilons.clone();
        let s = run_experiment(&cfg)?;
        let n = match model {
            Model::Words { r, .. } | Model::Binomial { r, .. } => r,
            _ => unreachable!(),
        };
        csv.push_str(&format!(
            "{label},{n},{},{},{},{}",
            s.trials,
            fmt_sig(s.mean),
            fmt_sig(s.std_error),
            fmt_sig(s.normalized)
        ));
        for entry in &s.tails {
            csv.push_str(&format!(",{}", fmt_sig(entry.frequency)));
        }
        csv.push('\n');
    }
    emit(&args.out, &csv)
}

fn cmd_blocks(args: BlocksArgs) -> Result<(), Failure> {
    let params = block_parameters::<f64>(
        args.n as u64,
        args.k as u64,
        args.delta,
        args.epsilon,
        args.alpha,
    )?;
    if params.e_max == 0 {
        return Err(Failure::invalid(format!(
            "derived e_max is 0 (ell = {}, m_max = {}); increase n or decrease delta",
            params.ell, params.m_max
        )));
    }
    let ell = u32::try_from(params.ell).map_err(|_| Failure::invalid("ell too large"))?;
    let e_max = u32::try_from(params.e_max).map_err(|_| Failure::invalid("e_max too large"))?;

    let w = sample_word_pair(args.n, args.n, args.k, RngStream::new(args.seed, 0))?;
    let g = words_to_graph(&w);
    let matching = planar_matching_recover(&g);
    let partition = build_block_partition(&matching, ell, e_max)?;
    let (classified, report) = classify_and_enlarge(&partition, args.delta, args.n)?;

    let mut invariants_ok = classified.edge_total() == matching.len() as u64
        && report.short_edge_bound_ok;
    for b in classified.blocks() {
        invariants_ok &= b.edge_count <= e_max && b.a_spread() <= ell && b.b_spread() <= ell;
        let (rb, sb) = b.enlarged.expect("classified");
        invariants_ok &= rb + sb <= 2 * ell;
    }

    let header = json!({
        "n": args.n,
        "k": args.k,
        "delta": args.delta,
        "epsilon": args.epsilon,
        "alpha": args.alpha,
        "seed": args.seed,
        "ell": params.ell,
        "e_max": params.e_max,
        "m_max": params.m_max,
        "matching_size": planar_matching_size(&g),
        "q": classified.q(),
        "type_tuple_len": type_of(&classified).len(),
        "q_ell_over_n": classified.q() as f64 * ell as f64 / args.n as f64,
        "short_count": report.short_count,
        "short_count_bound": report.short_count_bound,
        "sum_r_bar": report.sum_r_bar,
        "sum_s_bar": report.sum_s_bar,
        "invariants_ok": invariants_ok,
        "n_ge_k_beta": (args.n as f64) >= (args.k as f64).powf(args.beta),
    });
    let mut rounded = header;
    let text = canonical_json(&rounded);
    rounded = serde_json::from_str(&text).expect("json");
    println!("{}", serde_json::to_string_pretty(&rounded).expect("json"));
    println!();
    print!("{}", classified.to_text());
    Ok(())
}

fn parse_side(which: &str) -> Result<RegimeSide, Failure> {
    match which {
        "upper" => Ok(RegimeSide::Upper),
        "lower" => Ok(RegimeSide::Lower),
        other => Err(Failure::invalid(format!(
            "--which must be upper or lower, got `{other}`"
        ))),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let text = canonical_json(value);
    let v: Value = serde_json::from_str(&text).expect("json");
    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    Ok(())
}

fn cmd_bounds(which: BoundsCommand) -> Result<(), Failure> {
    match which {
        BoundsCommand::MUpper(a) => {
            print_json(&json!({ "value": m_upper::<f64>(a.r, a.s, a.k, a.delta)? }))
        }
        BoundsCommand::MLower(a) => {
            print_json(&json!({ "value": m_lower::<f64>(a.r, a.s, a.k, a.delta)? }))
        }
        BoundsCommand::SandwichRegime { base, c, which } => {
            let side = parse_side(&which)?;
            let check = sandwich_regime_check::<f64>(base.r, base.s, base.k, base.delta, c, side)?;
            print_json(&check)
        }
        BoundsCommand::SandwichTail { base, t, which } => {
            let value = match parse_side(&which)? {
                RegimeSide::Upper => sandwich_tail_upper::<f64>(base.r, base.s, base.k, base.delta, t)?,
                RegimeSide::Lower => sandwich_tail_lower::<f64>(base.r, base.s, base.k, base.delta, t)?,
            };
            print_json(&json!({
                "value": value,
                "m_upper": m_upper::<f64>(base.r, base.s, base.k, base.delta)?,
            }))
        }
        BoundsCommand::LisTail {
            n,
            lambda,
            b0,
            b1,
            c,
            which,
        } => {
            let flagged = match parse_side(&which)? {
                RegimeSide::Upper => lis_tail_upper::<f64>(n, lambda, b0, b1, c)?,
                RegimeSide::Lower => lis_tail_lower::<f64>(n, lambda, b0, b1, c)?,
            };
            print_json(&flagged)
        }
        BoundsCommand::Chebyshev { ex, pair_sum, t } => {
            print_json(&json!({ "value": chebyshev_indicator_bound::<f64>(ex, pair_sum, t)? }))
        }
        BoundsCommand::TypeCount { n, ell, q_max, c1 } => {
            print_json(&type_count_log_bound::<f64>(n, ell, q_max, c1)?)
        }
        BoundsCommand::BlockParams {
            n,
            k,
            delta,
            epsilon,
            alpha,
        } => print_json(&block_parameters::<f64>(n, k, delta, epsilon, alpha)?),
        BoundsCommand::CompositionParams { k, delta, gate_c } => {
            print_json(&composition_parameters::<f64>(k, delta, gate_c)?)
        }
        BoundsCommand::TailForm {
            model,
            n,
            k,
            p,
            epsilon,
            c,
        } => {
            let (tail_model, scale) = match model.as_str() {
                "words" => (
                    TailModel::Words,
                    k.ok_or_else(|| Failure::invalid("--k is required for the words form"))? as f64,
                ),
                "binomial" => (
                    TailModel::Binomial,
                    p.ok_or_else(|| Failure::invalid("--p is required for the binomial form"))?,
                ),
                other => {
                    return Err(Failure::invalid(format!(
                        "--model must be words or binomial, got `{other}`"
                    )))
                }
            };
            print_json(&json!({
                "value": concentration_tail_form::<f64>(n, scale, epsilon, c, tail_model)?
            }))
        }
        BoundsCommand::Johansson { p } => print_json(&json!({ "value": johansson_limit::<f64>(p)? })),
        BoundsCommand::OdbLimit { p } => print_json(&odb_limit::<f64>(p)?),
    }
}
