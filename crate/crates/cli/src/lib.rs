//! Command-line surface of dyngossip.
//!
//! Every subcommand reads and writes the JSON/CSV formats of
//! [`dyngossip::model::io`]. Exit status: 0 on success, 1 on a usage or
//! input error, 2 when an input breaks the model's contract (an infeasible
//! schedule, a disconnected round, a sequence that runs out).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dyngossip::adversary::{
    lower_bound_batch, lower_bound_experiment, lower_bound_run, ExperimentConfig,
};
use dyngossip::harness::{generate_sequence, GeneratorSpec, Model, RunConfig, RunMode};
use dyngossip::model::io::{
    matrix_from_json, matrix_to_json, read_to_string, schedule_to_json, sequence_from_json,
    sequence_to_json, write_metrics_csv,
};
use dyngossip::model::{
    new_distribution, run_online, run_schedule, CommGraph, DistributionSpec, GraphSequence, NodeId,
};
use dyngossip::offline::{algorithm1, derandomize_S, gather_all, Alg1Mode, Alg1Params, ScanStep};
use dyngossip::online::{Strategy, StrategyKind};
use dyngossip::rng::{stream, substream};
use dyngossip::{Error, Result, TokenMatrix};

/// Environment variable capping the worker threads of batch runs.
pub const THREADS_ENV: &str = "DYNGOSSIP_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "dyngossip",
    version,
    about = "k-gossip in dynamic networks: simulation, adversary and offline schedules"
)]
struct Cli {
    /// Also write the run configuration as JSON here.
    #[arg(long, global = true, value_name = "PATH")]
    config_out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a finite graph sequence.
    Gen(GenArgs),
    /// Generate an initial token distribution.
    Dist(DistArgs),
    /// Run an online strategy against the strong adversary or a fixed sequence.
    Simulate(SimulateArgs),
    /// Offline schedule for a known sequence.
    Offline(OfflineArgs),
    /// Schedule that collects every token at one node.
    Gather(GatherArgs),
    /// Choose the seed set deterministically and report the potential trace.
    Derandomize(DerandomizeArgs),
    /// Progress of an online strategy against the strong adversary.
    Lowerbound(LowerboundArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    #[value(alias = "gnp_repair")]
    Gnp,
    Static,
    Path,
    #[value(alias = "star_rotating")]
    Star,
    Recorded,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "gnp")]
    model: ModelArg,
    /// Edge probability for the gnp model.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sequence file: its first graph for `static`, the whole file for `recorded`.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DistKind {
    Bernoulli,
    #[value(alias = "one_token_per_node")]
    OnePerNode,
}

#[derive(Args, Debug)]
struct DistArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "bernoulli")]
    kind: DistKind,
    #[arg(long, default_value_t = 0.75)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// uniform, rr or rarest.
    #[arg(long, default_value = "uniform")]
    algo: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initial distribution; defaults to Bernoulli(3/4) drawn from the seed.
    #[arg(long, value_name = "PATH")]
    init: Option<PathBuf>,
    /// Play against this fixed sequence instead of the strong adversary.
    #[arg(long, value_name = "PATH")]
    seq: Option<PathBuf>,
    /// Defaults to n·k.
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Transcript JSON.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Per-round metrics CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Random,
    Derandomized,
}

#[derive(Args, Debug)]
struct OfflineArgs {
    #[arg(long, value_name = "PATH")]
    seq: PathBuf,
    #[arg(long, value_name = "PATH")]
    init: PathBuf,
    #[arg(long, value_enum, default_value = "random")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Schedule JSON.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Phase log JSON.
    #[arg(long, value_name = "PATH")]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GatherArgs {
    #[arg(long, value_name = "PATH")]
    seq: PathBuf,
    #[arg(long, value_name = "PATH")]
    init: PathBuf,
    #[arg(long)]
    target: usize,
    #[arg(long, default_value_t = 1)]
    start: usize,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DerandomizeArgs {
    #[arg(long, value_name = "PATH")]
    seq: PathBuf,
    #[arg(long)]
    k: usize,
    /// Seed-set size; defaults to the size the offline algorithm picks for these n and k.
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LowerboundArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// uniform, rr or rarest.
    #[arg(long, default_value = "uniform")]
    algo: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run seeds seed..seed+trials in parallel and report one row per trial.
    #[arg(long)]
    trials: Option<u64>,
    /// JSON record (single run) or array of rows (batch).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Batch rows, or per-round metrics for a single run.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Also write the full transcript of a single run.
    #[arg(long, value_name = "PATH")]
    transcript: Option<PathBuf>,
}

/// Runs the CLI on `argv` (including the program name), printing to the
/// process's stdout and stderr. Returns the exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli) {
        Ok(summary) => {
            let _ = writeln!(out, "{summary}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_contract_violation() {
                2
            } else {
                1
            }
        }
    }
}

fn execute(cli: Cli) -> Result<String> {
    let (config, summary) = match cli.command {
        Command::Gen(a) => gen(a)?,
        Command::Dist(a) => dist(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Offline(a) => offline(a)?,
        Command::Gather(a) => gather(a)?,
        Command::Derandomize(a) => derandomize(a)?,
        Command::Lowerbound(a) => lowerbound(a)?,
    };
    if let Some(path) = cli.config_out {
        write_json(&path, &config)?;
    }
    Ok(summary)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(value)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut body = text.to_owned();
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

fn load_sequence(path: &Path) -> Result<GraphSequence> {
    sequence_from_json(&read_to_string(path)?)
}

fn load_matrix(path: &Path) -> Result<TokenMatrix> {
    matrix_from_json(&read_to_string(path)?)
}

fn strategy_kind(name: &str) -> Result<StrategyKind> {
    name.parse()
}

fn config(mode: RunMode, n: usize, k: usize, seed: u64, outputs: Vec<&Path>) -> RunConfig {
    RunConfig {
        mode,
        n,
        k,
        seed,
        strategy: None,
        generator: None,
        outputs: outputs.into_iter().map(Path::to_path_buf).collect(),
    }
}

fn gen(a: GenArgs) -> Result<(RunConfig, String)> {
    let model = match a.model {
        ModelArg::Gnp => {
            if !(0.0..=1.0).contains(&a.p) {
                return Err(Error::InvalidArgument(format!(
                    "p = {} is not a probability",
                    a.p
                )));
            }
            Model::GnpRepair { p: a.p }
        }
        ModelArg::Path => Model::Path,
        ModelArg::Star => Model::StarRotating,
        ModelArg::Static => {
            let path = a
                .input
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("static needs --input".into()))?;
            let graph: CommGraph = (*load_sequence(path)?.graph(1)?).clone();
            if !graph.is_connected() {
                return Err(Error::Disconnected { n: graph.n() });
            }
            Model::Static { graph }
        }
        ModelArg::Recorded => Model::Recorded {
            path: a
                .input
                .clone()
                .ok_or_else(|| Error::InvalidArgument("recorded needs --input".into()))?,
        },
    };
    let spec = GeneratorSpec {
        model,
        n: a.n,
        seed: a.seed,
    };
    let seq = generate_sequence(&spec, a.rounds)?;
    write_text(&a.out, &sequence_to_json(&seq)?)?;
    let mut cfg = config(RunMode::Generate, a.n, 0, a.seed, vec![&a.out]);
    cfg.generator = Some(spec);
    Ok((
        cfg,
        format!(
            "wrote {} rounds on {} nodes to {}",
            a.rounds,
            a.n,
            a.out.display()
        ),
    ))
}

fn dist(a: DistArgs) -> Result<(RunConfig, String)> {
    let spec = match a.kind {
        DistKind::Bernoulli => {
            if !(0.0..=1.0).contains(&a.p) {
                return Err(Error::InvalidArgument(format!(
                    "p = {} is not a probability",
                    a.p
                )));
            }
            DistributionSpec::Bernoulli(a.p)
        }
        DistKind::OnePerNode => DistributionSpec::OneTokenPerNode,
    };
    let m = new_distribution(a.n, a.k, &spec, substream(a.seed, stream::DISTRIBUTION))?;
    write_text(&a.out, &matrix_to_json(&m)?)?;
    let missing = dyngossip::model::missing_count(&m);
    Ok((
        config(RunMode::Distribution, a.n, a.k, a.seed, vec![&a.out]),
        format!(
            "wrote {}x{} distribution with {missing} missing pairs to {}",
            a.n,
            a.k,
            a.out.display()
        ),
    ))
}

fn simulate(a: SimulateArgs) -> Result<(RunConfig, String)> {
    let kind = strategy_kind(&a.algo)?;
    let init = match &a.init {
        Some(path) => load_matrix(path)?,
        None => {
            let (n, k) = a
                .n
                .zip(a.k)
                .ok_or_else(|| Error::InvalidArgument("give --init or both --n and --k".into()))?;
            new_distribution(
                n,
                k,
                &DistributionSpec::Bernoulli(0.75),
                substream(a.seed, stream::DISTRIBUTION),
            )?
        }
    };
    let (n, k) = (init.n(), init.k());
    if a.n.is_some_and(|x| x != n) || a.k.is_some_and(|x| x != k) {
        return Err(Error::DimensionMismatch(format!(
            "--n/--k disagree with the {n}x{k} initial distribution"
        )));
    }
    let max_rounds = a.max_rounds.unwrap_or(n * k.max(1));
    let mut strategy = Strategy::new(kind, n, substream(a.seed, stream::STRATEGY));
    let transcript = match &a.seq {
        Some(path) => {
            let mut seq = load_sequence(path)?;
            if seq.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "sequence has {} nodes, distribution {n}",
                    seq.n()
                )));
            }
            run_online(&mut strategy, &mut seq, &init, max_rounds)?
        }
        None => run_online(
            &mut strategy,
            &mut dyngossip::adversary::StrongAdversary::new(),
            &init,
            max_rounds,
        )?,
    };
    write_text(&a.out, &serde_json::to_string(&transcript)?)?;
    let mut outputs = vec![a.out.as_path()];
    if let Some(path) = &a.csv {
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, transcript.metrics())?;
        fs::write(path, buf)?;
        outputs.push(path);
    }
    let mut cfg = config(RunMode::Online, n, k, a.seed, outputs);
    cfg.strategy = Some(kind.flag().to_owned());
    let status = if transcript.final_state.is_complete() {
        "complete"
    } else {
        "incomplete"
    };
    Ok((
        cfg,
        format!("{} rounds, {status}", transcript.rounds_used()),
    ))
}

fn offline(a: OfflineArgs) -> Result<(RunConfig, String)> {
    let seq = load_sequence(&a.seq)?;
    let init = load_matrix(&a.init)?;
    let (n, k) = (init.n(), init.k());
    if seq.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "sequence has {} nodes, distribution {n}",
            seq.n()
        )));
    }
    let mode = match a.mode {
        ModeArg::Random => Alg1Mode::Random,
        ModeArg::Derandomized => Alg1Mode::Derandomized,
    };
    let params = Alg1Params::new(n, k, mode);
    let out = algorithm1(&seq, &init, &params, a.seed)?;
    // The schedule was built by replaying it; check once more from scratch.
    let (end, _) = run_schedule(&init, &seq, &out.schedule)?;
    if !end.is_complete() {
        return Err(Error::Precondition(
            "schedule leaves tokens undelivered".into(),
        ));
    }
    write_text(&a.out, &schedule_to_json(&out.schedule)?)?;
    let mut outputs = vec![a.out.as_path()];
    if let Some(path) = &a.log {
        write_json(path, &out.log)?;
        outputs.push(path);
    }
    Ok((
        config(RunMode::OfflineAlg1, n, k, a.seed, outputs),
        format!(
            "{} rounds (fallback {})",
            out.log.total_rounds,
            if out.log.fallback_used {
                "used"
            } else {
                "unused"
            }
        ),
    ))
}

fn gather(a: GatherArgs) -> Result<(RunConfig, String)> {
    let seq = load_sequence(&a.seq)?;
    let init = load_matrix(&a.init)?;
    if seq.n() != init.n() {
        return Err(Error::DimensionMismatch(format!(
            "sequence has {} nodes, distribution {}",
            seq.n(),
            init.n()
        )));
    }
    let sched = gather_all(&seq, &init, NodeId(a.target), a.start)?;
    write_text(&a.out, &schedule_to_json(&sched)?)?;
    Ok((
        config(RunMode::Gather, init.n(), init.k(), 0, vec![&a.out]),
        format!("{} rounds from round {}", sched.len(), a.start),
    ))
}

#[derive(Serialize)]
struct StepReport {
    node: NodeId,
    added: bool,
    before: String,
    with: Option<String>,
    without: String,
}

impl From<&ScanStep> for StepReport {
    fn from(s: &ScanStep) -> Self {
        StepReport {
            node: s.node,
            added: s.added,
            before: s.before.to_string(),
            with: s.with.as_ref().map(ToString::to_string),
            without: s.without.to_string(),
        }
    }
}

#[derive(Serialize)]
struct DerandReport {
    s: usize,
    windows: Vec<dyngossip::offline::TokenWindow>,
    seed_set: Vec<NodeId>,
    padded: usize,
    initial_phi: String,
    final_phi: String,
    guaranteed: bool,
    steps: Vec<StepReport>,
}

fn derandomize(a: DerandomizeArgs) -> Result<(RunConfig, String)> {
    let seq = load_sequence(&a.seq)?;
    let n = seq.n();
    let mut params = Alg1Params::new(n, a.k, Alg1Mode::Derandomized);
    if let Some(s) = a.s {
        params.s = s;
    }
    let windows = params.nominal_windows();
    let outcome = derandomize_S(&seq, &windows, params.s)?;
    let report = DerandReport {
        s: params.s,
        windows,
        seed_set: outcome.seed_set.clone(),
        padded: outcome.padded,
        initial_phi: outcome.initial_phi.to_string(),
        final_phi: outcome.final_phi.to_string(),
        guaranteed: outcome.guaranteed,
        steps: outcome.steps.iter().map(StepReport::from).collect(),
    };
    write_json(&a.out, &report)?;
    Ok((
        config(RunMode::Derandomize, n, a.k, 0, vec![&a.out]),
        format!(
            "|S| = {}, initial potential {}, {}",
            report.seed_set.len(),
            report.initial_phi,
            if report.guaranteed {
                "coverage guaranteed"
            } else {
                "no guarantee"
            }
        ),
    ))
}

fn thread_budget() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()))
}

fn lowerbound(a: LowerboundArgs) -> Result<(RunConfig, String)> {
    let kind = strategy_kind(&a.algo)?;
    let mut outputs = vec![a.out.as_path()];
    let summary = match a.trials {
        Some(trials) => {
            let seeds: Vec<u64> = (0..trials).map(|i| a.seed.wrapping_add(i)).collect();
            let rows = lower_bound_batch(a.n, a.k, kind, &seeds, thread_budget())?;
            write_json(&a.out, &rows)?;
            if let Some(path) = &a.csv {
                let mut w = csv::Writer::from_path(path)?;
                for row in &rows {
                    w.serialize(row)?;
                }
                w.flush()?;
                outputs.push(path);
            }
            let min = rows.iter().map(|r| r.rounds_used).min().unwrap_or(0);
            format!("{} trials, fewest rounds {min}", rows.len())
        }
        None => {
            let record = match &a.transcript {
                Some(path) => {
                    let (record, transcript) =
                        lower_bound_run(&ExperimentConfig::new(a.n, a.k, kind, a.seed))?;
                    write_text(path, &serde_json::to_string(&transcript)?)?;
                    outputs.push(path);
                    record
                }
                None => lower_bound_experiment(a.n, a.k, kind, a.seed)?,
            };
            write_json(&a.out, &record)?;
            if let Some(path) = &a.csv {
                let mut buf = Vec::new();
                write_metrics_csv(&mut buf, &record.metrics)?;
                fs::write(path, buf)?;
                outputs.push(path);
            }
            format!(
                "{} rounds, {}, at most {} useful exchanges per round",
                record.rounds_used,
                if record.completed {
                    "complete"
                } else {
                    "incomplete"
                },
                record.max_useful_exchanges
            )
        }
    };
    let mut cfg = config(RunMode::Lowerbound, a.n, a.k, a.seed, outputs);
    cfg.strategy = Some(kind.flag().to_owned());
    Ok((cfg, summary))
}
