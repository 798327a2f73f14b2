//! Command-line front end. Exit codes: 0 success, 2 invalid input,
//! 3 runtime failure (including a scenario that misses its expectation).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{ConvergenceCriteria, OutcomeClassification};
use crate::config::{load_graph_file, load_run_config, ConfigError, GeneratorSpec, GraphFile, Indexing, ResolvedRun, RunConfigFile};
use crate::dynamics::{ModelConfig, OpinionState, SimState, Variant};
use crate::engine::{
    density_sweep, read_trajectory, replay, run_large, run_large_with_sink, CsvSnapshotWriter, EngineError,
    RunMetrics, RunPlan, SweepSpec, ThinRecord, ToleranceDistribution,
};
use crate::graph::{generate_preferential_attachment, topology, AgentId, WeightScheme};
use crate::scenarios::{builtin, verify, BUILTIN_NAMES};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Dynamics(_) | EngineError::InvalidPlan(_) => CliError::Input(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Parser, Debug)]
#[command(name = "somlab", version, about = "Opinion dynamics with spirals of silence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a simulation from a JSON run file.
    Simulate(SimulateArgs),
    /// Run builtin scenarios and compare with their expected outcomes.
    Scenario(ScenarioArgs),
    /// Write a generated graph file.
    Generate(GenerateArgs),
    /// Check a graph file and print its topology.
    Validate(ValidateArgs),
    /// Consensus rate and silence over preferential-attachment densities.
    Sweep(SweepArgs),
    /// Time a large preferential-attachment run.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunFlags {
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads per step.
    #[arg(long, env = "SOMLAB_THREADS")]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub window: Option<u64>,
    #[arg(long)]
    pub snapshot_stride: Option<u64>,
    /// Keep only the extremes and silence series; no trajectory file.
    #[arg(long)]
    pub series_only: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed of the run file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Classify an existing trajectory file instead of simulating.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Adds a run_id column to the trajectory file.
    #[arg(long)]
    pub run_id: Option<String>,
    #[command(flatten)]
    pub flags: RunFlags,
}

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    /// Scenario names; all builtins when empty.
    pub names: Vec<String>,
    #[arg(long)]
    pub list: bool,
    /// Write each scenario as a run file into this directory.
    #[arg(long)]
    pub export: Option<PathBuf>,
    /// Also write run artifacts per scenario under this directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GraphKind {
    Clique,
    PreferentialAttachment,
    RandomStronglyConnected,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WeightKind {
    Uniform,
    Dirichlet,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GraphKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Extra edge probability for random strongly connected graphs.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = WeightKind::Uniform)]
    pub weights: WeightKind,
    #[arg(long, default_value_t = 0.0)]
    pub self_weight: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub one_based: bool,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub graph: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 8])]
    pub m: Vec<usize>,
    #[arg(long, default_value = "som_plus")]
    pub variant: Variant,
    /// Seeds 0..seeds.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Fixed radius for every agent instead of uniform draws on [0, 1].
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value = "som_minus")]
    pub variant: Variant,
    #[arg(long, default_value_t = 100)]
    pub steps: u64,
    #[arg(long, env = "SOMLAB_THREADS", default_value_t = 1)]
    pub parallelism: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed radius for every agent instead of uniform draws on [0, 1].
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Write the extremes series (t,max,min,range) here.
    #[arg(long)]
    pub extremes_out: Option<PathBuf>,
}

/// Contents of `summary.json`. Agent ids are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: Option<String>,
    pub variant: Variant,
    pub n: usize,
    pub classification: OutcomeClassification,
    pub final_max: f64,
    pub final_min: f64,
    pub final_range: f64,
    pub perpetual_silence: Vec<AgentId>,
}

impl RunSummary {
    fn new(name: Option<String>, config: &ModelConfig, record: &ThinRecord) -> Self {
        let b = &record.final_state.opinions;
        RunSummary {
            name,
            variant: config.variant,
            n: b.len(),
            classification: record.outcome.clone(),
            final_max: b.max(),
            final_min: b.min(),
            final_range: b.range(),
            perpetual_silence: record.perpetual_silent.clone(),
        }
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Scenario(a) => cmd_scenario(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Bench(a) => cmd_bench(&a),
    }
}

fn apply_flags(run: &mut ResolvedRun, flags: &RunFlags) -> Result<(), CliError> {
    let c = run.criteria;
    run.criteria = ConvergenceCriteria::new(
        flags.epsilon.unwrap_or(c.epsilon),
        flags.window.unwrap_or(c.window),
        flags.max_steps.unwrap_or(c.max_steps),
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(p) = flags.parallelism {
        run.plan.parallelism = p;
    }
    if let Some(s) = flags.snapshot_stride {
        run.plan.snapshot_stride = s;
    }
    run.plan.record_series_only |= flags.series_only;
    run.plan.check()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

fn write_extremes(path: &Path, record: &ThinRecord) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = csv::Writer::from_writer(BufWriter::new(file));
    let to_io = |e: csv::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    out.write_record(["t", "max", "min", "range"]).map_err(to_io)?;
    let t0 = record.final_state.t + 1 - record.max_series.len() as u64;
    for (k, ((max, min), range)) in
        record.max_series.iter().zip(&record.min_series).zip(&record.range_series).enumerate()
    {
        out.write_record([
            (t0 + k as u64).to_string(),
            max.to_string(),
            min.to_string(),
            range.to_string(),
        ])
        .map_err(to_io)?;
    }
    out.flush().map_err(io_err(path))
}

/// Runs `run` and writes `trajectory.csv` (unless series-only),
/// `extremes.csv` and `summary.json` into `out_dir`.
fn simulate_into(run: &ResolvedRun, out_dir: &Path, run_id: Option<String>) -> Result<RunSummary, CliError> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let record = if run.plan.record_series_only {
        run_large(&run.graph, &run.config, run.initial.clone(), &run.criteria, &run.plan)?.0
    } else {
        let path = out_dir.join("trajectory.csv");
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut sink = CsvSnapshotWriter::new(BufWriter::new(file), run_id).map_err(io_err(&path))?;
        let plan = RunPlan { record_series_only: true, ..run.plan };
        run_large_with_sink(&run.graph, &run.config, run.initial.clone(), &run.criteria, &plan, Some(&mut sink))?.0
    };
    write_extremes(&out_dir.join("extremes.csv"), &record)?;
    let summary = RunSummary::new(run.name.clone(), &run.config, &record);
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let mut file = load_run_config(&a.config)?;
    if let Some(seed) = a.seed {
        file.seed = seed;
    }
    let base = a.config.parent().unwrap_or(Path::new("."));
    let mut run = file.resolve(base)?;
    apply_flags(&mut run, &a.flags)?;
    let out_dir = a
        .flags
        .out_dir
        .clone()
        .or_else(|| run.output.dir.as_ref().map(|d| base.join(d)))
        .unwrap_or_else(|| PathBuf::from("."));
    let run_id = a.run_id.clone().or_else(|| run.output.run_id.clone());

    let summary = match &a.replay {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let states = read_trajectory(io::BufReader::new(file), &run.config)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let record = replay(&run.graph, &run.config, states, &run.criteria)?;
            std::fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
            let summary = RunSummary::new(run.name.clone(), &run.config, &record);
            write_json(&out_dir.join("summary.json"), &summary)?;
            summary
        }
        None => simulate_into(&run, &out_dir, run_id)?,
    };
    println!(
        "{}: {} after {} steps, final range {}",
        summary.name.as_deref().unwrap_or("run"),
        summary.classification.label(),
        summary.classification.steps_used,
        summary.final_range
    );
    Ok(())
}

fn cmd_scenario(a: &ScenarioArgs) -> Result<(), CliError> {
    if a.list {
        for name in BUILTIN_NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let names: Vec<&str> =
        if a.names.is_empty() { BUILTIN_NAMES.to_vec() } else { a.names.iter().map(String::as_str).collect() };
    let scenarios = names
        .iter()
        .map(|n| builtin(n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(e.to_string()))?;

    if let Some(dir) = &a.export {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for s in &scenarios {
            write_json(&dir.join(format!("{}.json", s.name)), &RunConfigFile::from_scenario(s))?;
        }
    }
    let criteria = ConvergenceCriteria::default();
    let mut failed = 0;
    for s in &scenarios {
        let check = verify(s, &criteria);
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {} -> {} after {} steps", s.name, check.outcome.label(), check.outcome.steps_used);
        for f in &check.failures {
            println!("    {f}");
        }
        if !check.passed {
            failed += 1;
        }
        if let Some(dir) = &a.out_dir {
            let run = ResolvedRun {
                name: Some(s.name.clone()),
                graph: s.graph.clone(),
                config: s.config.clone(),
                initial: s.initial.clone(),
                criteria,
                plan: RunPlan::default(),
                output: Default::default(),
                expected: Some(s.expected.clone()),
            };
            simulate_into(&run, &dir.join(&s.name), None)?;
        }
    }
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} scenario(s) missed their expected outcome")));
    }
    Ok(())
}

fn scheme(kind: WeightKind, self_weight: f64) -> WeightScheme {
    match kind {
        WeightKind::Uniform => WeightScheme::Uniform { self_weight },
        WeightKind::Dirichlet => WeightScheme::RandomDirichlet { self_weight },
    }
}

fn cmd_generate(a: &GenerateArgs) -> Result<(), CliError> {
    let weights = scheme(a.weights, a.self_weight);
    let spec = match a.kind {
        GraphKind::Clique => GeneratorSpec::Clique { n: a.n, weights, seed: a.seed },
        GraphKind::PreferentialAttachment => {
            GeneratorSpec::PreferentialAttachment { n: a.n, m: a.m, weights, seed: a.seed }
        }
        GraphKind::RandomStronglyConnected => {
            GeneratorSpec::RandomStronglyConnected { n: a.n, extra_edge_prob: a.p, weights, seed: a.seed }
        }
    };
    let g = spec.generate().map_err(|e| CliError::Input(e.to_string()))?;
    let indexing = if a.one_based { Indexing::One } else { Indexing::Zero };
    let file = GraphFile::from_graph(&g, indexing);
    match &a.out {
        Some(path) => write_json(path, &file),
        None => {
            let text = serde_json::to_string(&file).map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_validate(a: &ValidateArgs) -> Result<(), CliError> {
    let g = load_graph_file(&a.graph)?;
    let report = topology(&g);
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?);
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), CliError> {
    let mut spec = SweepSpec::new(a.n, a.m.clone(), a.variant, (0..a.seeds).collect());
    let c = spec.criteria;
    spec.criteria = ConvergenceCriteria::new(
        a.epsilon.unwrap_or(c.epsilon),
        c.window,
        a.max_steps.unwrap_or(c.max_steps),
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(value) = a.tolerance {
        if !(0.0..=1.0).contains(&value) {
            return Err(CliError::Input(format!("tolerance {value} outside [0, 1] (τ ∈ [0,1] required)")));
        }
        spec.tolerances = ToleranceDistribution::Constant { value };
    }
    let rows = density_sweep(&spec)?;
    let mut out: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(io_err(path))?)),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(&mut out);
    for row in &rows {
        w.serialize(row).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

#[derive(Serialize)]
struct BenchReport<'a> {
    n: usize,
    m: usize,
    edges: usize,
    variant: Variant,
    parallelism: usize,
    classification: &'a str,
    steps: u64,
    wall_seconds: f64,
    steps_per_second: f64,
    peak_memory_bytes: u64,
    working_set_bytes: u64,
    final_silent_fraction: f64,
}

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let g = generate_preferential_attachment(a.n, a.m, a.seed, WeightScheme::RandomDirichlet { self_weight: 0.0 })
        .map_err(|e| CliError::Input(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x5eed);
    let opinions: Vec<f64> = (0..a.n).map(|_| rng.random::<f64>()).collect();
    let taus: Vec<f64> = match a.tolerance {
        Some(t) => vec![t; a.n],
        None => (0..a.n).map(|_| rng.random::<f64>()).collect(),
    };
    let config = ModelConfig::new(a.variant, taus).map_err(|e| CliError::Input(e.to_string()))?;
    let opinions = OpinionState::new(opinions).map_err(|e| CliError::Input(e.to_string()))?;
    let initial = SimState::initial(&config, opinions);
    let plan = RunPlan { snapshot_stride: 1, parallelism: a.parallelism, record_series_only: true };
    let (record, metrics): (ThinRecord, RunMetrics) =
        run_large(&g, &config, initial, &ConvergenceCriteria::fixed_horizon(a.steps), &plan)?;
    if let Some(path) = &a.extremes_out {
        write_extremes(path, &record)?;
    }
    let report = BenchReport {
        n: a.n,
        m: a.m,
        edges: g.edge_count(),
        variant: a.variant,
        parallelism: a.parallelism,
        classification: record.outcome.label(),
        steps: metrics.steps,
        wall_seconds: metrics.wall_seconds,
        steps_per_second: metrics.steps_per_second,
        peak_memory_bytes: metrics.peak_memory_bytes,
        working_set_bytes: metrics.working_set_bytes,
        final_silent_fraction: metrics.silent_fraction_series.last().copied().unwrap_or(0.0),
    };
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?);
    Ok(())
}
