//! Command-line workflows: distance series, anomaly detection, opinion
//! prediction, synthetic data generation, and scaling benchmarks.
//!
//! Every run writes one JSON manifest next to its output recording the
//! resolved configuration, seeds, input digests, and wall time, so runs
//! are reproducible byte for byte.

mod manifest;

use clap::{Args, Parser, Subcommand};
use snd_core::analysis::{
    anomaly_scores, distance_series, prediction_experiment, roc, DistanceSeries, ExperimentParams,
    Measure, MeasureKind, PredictionMethod, TransitionRecord,
};
use snd_core::config::ModelConfigFile;
use snd_core::netcore::{load_network, load_state_series, write_network, write_state_series};
use snd_core::simgen::{gen_series, SimParams, StepOverride};
use snd_core::snd::{fast_snd, snd, SndConfig};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_INPUT: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Debug)]
enum CliError {
    Input(String),
    Config(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Config(m) | CliError::Internal(m) => m,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn input_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn config_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn snd_err(e: snd_core::snd::SndError) -> CliError {
    use snd_core::snd::SndError;
    match e {
        SndError::StateMismatch { .. } => CliError::Input(e.to_string()),
        SndError::FastPathNeedsPerBinBanks => CliError::Config(e.to_string()),
        SndError::Ground(g) => CliError::Config(g.to_string()),
        SndError::Transport(t) => CliError::Internal(t.to_string()),
    }
}

fn analysis_err(e: snd_core::analysis::AnalysisError) -> CliError {
    use snd_core::analysis::AnalysisError;
    match e {
        AnalysisError::Snd(inner) => snd_err(inner),
        AnalysisError::TooShort { .. }
        | AnalysisError::NoTargets
        | AnalysisError::NotEnoughActive { .. }
        | AnalysisError::EmptyTruth => CliError::Input(e.to_string()),
        AnalysisError::Net(inner) => CliError::Input(inner.to_string()),
    }
}

#[derive(Parser)]
#[command(name = "snd", version, about = "Opinion-state distances over social networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distances between adjacent states of a series.
    Distance(DistanceArgs),
    /// Rank transitions by anomaly score, optionally against a truth set.
    Detect(DetectArgs),
    /// Repeated-trial opinion prediction accuracy table.
    Predict(PredictArgs),
    /// Generate a synthetic scale-free network and opinion series.
    Generate(GenerateArgs),
    /// Wall-time scaling of the fast and dense paths.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ModelFlags {
    /// Model config JSON overriding the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Propagation model: agnostic, icc, or ltc.
    #[arg(long)]
    model: Option<String>,
}

impl ModelFlags {
    fn resolve(&self) -> CliResult<(SndConfig, serde_json::Value)> {
        let mut file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(input_err)?;
                ModelConfigFile::from_json(&text).map_err(config_err)?
            }
            None => ModelConfigFile::from_json("{}").expect("defaults parse"),
        };
        if let Some(model) = &self.model {
            file.model = model.clone();
        }
        let config = file.to_snd_config().map_err(config_err)?;
        let snapshot = serde_json::to_value(&config).map_err(config_err)?;
        Ok((config, snapshot))
    }
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    states: PathBuf,
    /// snd, hamming, quadform, walkdist, or l1.
    #[arg(long, default_value = "snd")]
    measure: String,
    #[command(flatten)]
    model: ModelFlags,
    /// Reduced evaluation (default).
    #[arg(long, conflicts_with = "dense")]
    fast: bool,
    /// Dense evaluation: full ground-distance matrices.
    #[arg(long)]
    dense: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    /// Distance series CSV produced by `snd distance`.
    #[arg(long, conflicts_with_all = ["graph", "states"])]
    distances: Option<PathBuf>,
    #[arg(long, requires = "states")]
    graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    states: Option<PathBuf>,
    #[arg(long, default_value = "snd")]
    measure: String,
    #[command(flatten)]
    model: ModelFlags,
    /// Comma-separated transition indices that are truly anomalous.
    #[arg(long)]
    truth: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    states: PathBuf,
    /// Number of active users whose opinions are hidden per trial.
    #[arg(long, default_value_t = 20)]
    targets: usize,
    /// Distance measures to compare (repeatable, comma-separated).
    #[arg(long, value_delimiter = ',')]
    measure: Vec<String>,
    /// Non-distance baselines: nhood-voting, community-lp.
    #[arg(long, value_delimiter = ',')]
    baseline: Vec<String>,
    /// Random opinion assignments searched per prediction.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// History states used for extrapolation.
    #[arg(long, default_value_t = 3)]
    history: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    /// Scale-free exponent in [-2.9, -2.1].
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, default_value_t = 0.12)]
    pnbr: f64,
    #[arg(long, default_value_t = 0.01)]
    pext: f64,
    /// Evolution steps; the series holds steps + 1 states.
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 100)]
    adopters: usize,
    /// Fraction of neutral users sampled per step.
    #[arg(long, default_value_t = 0.1)]
    frac: f64,
    /// Comma-separated steps evolved with the anomalous probabilities.
    #[arg(long)]
    anomaly_steps: Option<String>,
    #[arg(long, default_value_t = 0.08)]
    anomaly_pnbr: f64,
    #[arg(long, default_value_t = 0.05)]
    anomaly_pext: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix: writes <out>.graph.json and <out>.states.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated network sizes.
    #[arg(long)]
    sizes: String,
    /// Users changing opinion per compared pair.
    #[arg(long, default_value_t = 200)]
    ndelta: usize,
    /// Active users per opinion in the base state.
    #[arg(long, default_value_t = 500)]
    active: usize,
    /// Dense path measured only up to this size.
    #[arg(long, default_value_t = 400)]
    dense_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SND_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
        }
    }
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match &cli.command {
        Command::Distance(args) => cmd_distance(args, started),
        Command::Detect(args) => cmd_detect(args, started),
        Command::Predict(args) => cmd_predict(args, started),
        Command::Generate(args) => cmd_generate(args, started),
        Command::Bench(args) => cmd_bench(args, started),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn parse_measure(name: &str) -> CliResult<MeasureKind> {
    Ok(match name {
        "snd" => MeasureKind::Snd,
        "hamming" => MeasureKind::Hamming,
        "quadform" => MeasureKind::QuadForm,
        "walkdist" => MeasureKind::WalkDist,
        "l1" => MeasureKind::L1,
        other => return Err(CliError::Config(format!("unknown measure {other:?}"))),
    })
}

fn write_file(path: &Path, content: &str) -> CliResult<()> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(content.as_bytes())
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn distance_csv(series: &DistanceSeries) -> String {
    let mut out = String::from("t,raw,active,normalized,scaled\n");
    for r in &series.records {
        out.push_str(&format!(
            "{},{:.9},{},{:.9},{:.9}\n",
            r.t, r.raw, r.active, r.normalized, r.scaled
        ));
    }
    out
}

fn cmd_distance(args: &DistanceArgs, started: Instant) -> CliResult<()> {
    let (config, config_snapshot) = args.model.resolve()?;
    let measure_kind = parse_measure(&args.measure)?;
    let network = load_network(&args.graph).map_err(input_err)?;
    let series = load_state_series(&args.states, &network).map_err(input_err)?;

    let records = if measure_kind == MeasureKind::Snd {
        let states = series.states();
        let mut records = Vec::with_capacity(states.len() - 1);
        if states.len() < 2 {
            return Err(CliError::Input("need at least 2 states".into()));
        }
        for t in 1..states.len() {
            let raw = if args.dense {
                snd(&states[t - 1], &states[t], &network, &config)
            } else {
                fast_snd(&states[t - 1], &states[t], &network, &config)
            }
            .map_err(snd_err)?;
            let active = states[t].active_count();
            records.push(TransitionRecord {
                t,
                raw,
                active,
                normalized: raw / active.max(1) as f64,
                scaled: 0.0,
            });
        }
        let lo = records.iter().map(|r| r.normalized).fold(f64::INFINITY, f64::min);
        let hi = records.iter().map(|r| r.normalized).fold(f64::NEG_INFINITY, f64::max);
        for r in &mut records {
            r.scaled = if hi > lo { (r.normalized - lo) / (hi - lo) } else { 0.0 };
        }
        DistanceSeries { records }
    } else {
        let measure = Measure::new(measure_kind, &network, Some(&config));
        distance_series(&series, &measure).map_err(analysis_err)?
    };

    write_file(&args.out, &distance_csv(&records))?;
    manifest::write(
        "distance",
        &config_snapshot,
        &[],
        &[&args.graph, &args.states],
        &[&args.out],
        started,
    )
    .map_err(input_err)?;
    Ok(())
}

fn parse_index_set(text: &str) -> CliResult<std::collections::BTreeSet<usize>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("bad transition index {s:?}")))
        })
        .collect()
}

/// Read the `scaled` column of a distance CSV back into records.
fn read_distance_csv(path: &Path) -> CliResult<DistanceSeries> {
    let text = std::fs::read_to_string(path).map_err(input_err)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CliError::Input(format!("line {}: expected 5 columns", i + 1)));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("line {}: bad number {s:?}", i + 1)))
        };
        records.push(TransitionRecord {
            t: fields[0]
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("line {}: bad index", i + 1)))?,
            raw: parse(fields[1])?,
            active: parse(fields[2])? as usize,
            normalized: parse(fields[3])?,
            scaled: parse(fields[4])?,
        });
    }
    if records.is_empty() {
        return Err(CliError::Input("distance file holds no transitions".into()));
    }
    Ok(DistanceSeries { records })
}

fn cmd_detect(args: &DetectArgs, started: Instant) -> CliResult<()> {
    let (config, config_snapshot) = args.model.resolve()?;
    let mut inputs: Vec<&Path> = Vec::new();
    let series = match (&args.distances, &args.graph, &args.states) {
        (Some(path), _, _) => {
            inputs.push(path);
            read_distance_csv(path)?
        }
        (None, Some(graph), Some(states)) => {
            inputs.push(graph);
            inputs.push(states);
            let network = load_network(graph).map_err(input_err)?;
            let state_series = load_state_series(states, &network).map_err(input_err)?;
            let measure = Measure::new(parse_measure(&args.measure)?, &network, Some(&config));
            distance_series(&state_series, &measure).map_err(analysis_err)?
        }
        _ => {
            return Err(CliError::Input(
                "give either --distances or both --graph and --states".into(),
            ))
        }
    };

    let report = anomaly_scores(&series).map_err(analysis_err)?;
    let mut out = String::from("t,score,rank\n");
    let rank_of: std::collections::HashMap<usize, usize> =
        report.ranked.iter().enumerate().map(|(r, &t)| (t, r + 1)).collect();
    for (t, s) in &report.scores {
        out.push_str(&format!("{},{:.9},{}\n", t, s, rank_of[t]));
    }
    write_file(&args.out, &out)?;
    let mut outputs: Vec<PathBuf> = vec![args.out.clone()];

    if let Some(truth_text) = &args.truth {
        let truth = parse_index_set(truth_text)?;
        let curve = roc(&report, &truth).map_err(analysis_err)?;
        let roc_path = args.out.with_extension("roc.csv");
        let mut roc_csv = String::from("fpr,tpr\n");
        for (fpr, tpr) in &curve.points {
            roc_csv.push_str(&format!("{fpr:.9},{tpr:.9}\n"));
        }
        write_file(&roc_path, &roc_csv)?;
        println!("auc {:.6}", curve.auc);
        outputs.push(roc_path);
    }
    let output_refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    manifest::write("detect", &config_snapshot, &[], &inputs, &output_refs, started)
        .map_err(input_err)?;
    Ok(())
}

fn cmd_predict(args: &PredictArgs, started: Instant) -> CliResult<()> {
    let (config, config_snapshot) = args.model.resolve()?;
    let network = load_network(&args.graph).map_err(input_err)?;
    let series = load_state_series(&args.states, &network).map_err(input_err)?;

    let mut methods = Vec::new();
    if args.measure.is_empty() && args.baseline.is_empty() {
        methods.extend([
            PredictionMethod::Distance(MeasureKind::Snd),
            PredictionMethod::Distance(MeasureKind::Hamming),
            PredictionMethod::Distance(MeasureKind::QuadForm),
            PredictionMethod::Distance(MeasureKind::WalkDist),
            PredictionMethod::NhoodVoting,
            PredictionMethod::CommunityLp,
        ]);
    }
    for m in &args.measure {
        methods.push(PredictionMethod::Distance(parse_measure(m)?));
    }
    for b in &args.baseline {
        methods.push(match b.as_str() {
            "nhood-voting" => PredictionMethod::NhoodVoting,
            "community-lp" => PredictionMethod::CommunityLp,
            other => return Err(CliError::Config(format!("unknown baseline {other:?}"))),
        });
    }

    let params = ExperimentParams {
        trials: args.trials,
        targets: args.targets,
        assignment_samples: args.samples,
        history_window: args.history,
        seed: args.seed,
    };
    let rows = prediction_experiment(&series, &network, &methods, &params, Some(&config))
        .map_err(analysis_err)?;
    let mut out = String::from("method,mean,stddev\n");
    for row in &rows {
        out.push_str(&format!("{},{:.2},{:.2}\n", row.method, row.mean, row.stddev));
    }
    write_file(&args.out, &out)?;
    manifest::write(
        "predict",
        &config_snapshot,
        &[args.seed],
        &[&args.graph, &args.states],
        &[&args.out],
        started,
    )
    .map_err(input_err)?;
    Ok(())
}

fn cmd_generate(args: &GenerateArgs, started: Instant) -> CliResult<()> {
    let params = SimParams {
        n: args.n,
        sf_exponent: args.gamma,
        p_nbr: args.pnbr,
        p_ext: args.pext,
        initial_adopters: args.adopters,
        steps: args.steps,
        activation_fraction: args.frac,
        seed: args.seed,
    };
    params.validate().map_err(config_err)?;
    let overrides: Vec<StepOverride> = match &args.anomaly_steps {
        Some(text) => parse_index_set(text)?
            .into_iter()
            .map(|step| StepOverride {
                step,
                p_nbr: args.anomaly_pnbr,
                p_ext: args.anomaly_pext,
            })
            .collect(),
        None => Vec::new(),
    };
    let (network, series) = gen_series(&params, &overrides).map_err(config_err)?;

    let graph_path = args.out.with_extension("graph.json");
    let states_path = args.out.with_extension("states.csv");
    write_network(&network, &graph_path).map_err(input_err)?;
    write_state_series(&series, &states_path).map_err(input_err)?;
    let snapshot = serde_json::json!({ "params": params, "overrides": overrides });
    manifest::write(
        "generate",
        &snapshot,
        &[args.seed],
        &[],
        &[&graph_path, &states_path],
        started,
    )
    .map_err(input_err)?;
    Ok(())
}

fn cmd_bench(args: &BenchArgs, started: Instant) -> CliResult<()> {
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim().parse().map_err(|_| CliError::Config(format!("bad size {s:?}")))
        })
        .collect::<CliResult<_>>()?;
    if sizes.is_empty() {
        return Err(CliError::Config("empty size list".into()));
    }
    let (config, config_snapshot) = args.model.resolve()?;
    let mut out = String::from("n,ndelta,path,seconds\n");
    for &n in &sizes {
        if args.ndelta + 2 * args.active > n {
            return Err(CliError::Config(format!(
                "size {n} too small for {} active users plus {} changes",
                2 * args.active,
                args.ndelta
            )));
        }
        let network = snd_core::simgen::gen_scale_free(n, -2.3, args.seed);
        let g1 = snd_core::simgen::initial_state_seeded(&network, 2 * args.active, args.seed);
        let g2 = snd_core::simgen::random_transition(&network, &g1, args.ndelta, args.seed)
            .map_err(input_err)?;

        let t0 = Instant::now();
        let fast_value = fast_snd(&g1, &g2, &network, &config).map_err(snd_err)?;
        let fast_secs = t0.elapsed().as_secs_f64();
        out.push_str(&format!("{n},{},fast,{fast_secs:.6}\n", args.ndelta));

        if n <= args.dense_max {
            let t0 = Instant::now();
            let dense_value = snd(&g1, &g2, &network, &config).map_err(snd_err)?;
            let dense_secs = t0.elapsed().as_secs_f64();
            out.push_str(&format!("{n},{},dense,{dense_secs:.6}\n", args.ndelta));
            if dense_value != fast_value {
                return Err(CliError::Internal(format!(
                    "fast/dense mismatch at n={n}: {fast_value} vs {dense_value}"
                )));
            }
        }
    }
    write_file(&args.out, &out)?;
    manifest::write("bench", &config_snapshot, &[args.seed], &[], &[&args.out], started)
        .map_err(input_err)?;
    Ok(())
}
