use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pqa_core::harness::{
    self, aggregate, ar_summary, read_results, write_aggregate, write_ar_summary, Algorithm, ExperimentConfig,
    GraphType, RunsSchedule,
};

#[derive(Parser)]
#[command(name = "pqa", version, about = "Progressive QAOA+ maximum independent set experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate graph instances and a seed manifest.
    Gen {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Destination directory; defaults to <output-dir>/graphs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm once and print the result row as JSON.
    Solve {
        /// Edge-list file.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: Algorithm,
        #[arg(short, long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tuning: TuningArgs,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a full sweep and write results, aggregates and metadata.
    Benchmark {
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Aggregate an existing results table.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.8, 0.85, 0.9, 0.95, 1.0])]
        targets: Vec<f64>,
        /// Aggregate CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-depth OAR/AAR means here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "graph-type", value_delimiter = ',', value_parser = parse_graph_type)]
    graph_types: Vec<GraphType>,
    #[arg(long = "graph-file")]
    graph_files: Vec<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    graphs_per_type: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    depths: Vec<usize>,
    #[arg(long)]
    runs_per_depth: Option<usize>,
    /// Use 2^p runs above depth 6.
    #[arg(long)]
    doubling: bool,
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Vec<Algorithm>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    targets: Vec<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, env = "PQA_WORKERS")]
    workers: Option<usize>,
    #[command(flatten)]
    tuning: TuningArgs,
}

#[derive(Args)]
struct TuningArgs {
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    initial_size: Option<usize>,
    #[arg(long)]
    delta_init: Option<f64>,
    #[arg(long)]
    delta_res: Option<f64>,
    /// Keep growing after an initial-value exit instead of ending the run.
    #[arg(long)]
    skip_and_continue: bool,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: pqa_core::Error| e.to_string())
}

fn parse_graph_type(s: &str) -> Result<GraphType, String> {
    s.parse().map_err(|e: pqa_core::Error| e.to_string())
}

impl TuningArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(x) = self.xi {
            cfg.pqa.xi = x;
            cfg.classical.xi = x;
        }
        if let Some(k) = self.initial_size {
            cfg.pqa.initial_size = k;
            cfg.classical.initial_size = k;
        }
        if let Some(d) = self.delta_init {
            cfg.pqa.delta_init = d;
        }
        if let Some(d) = self.delta_res {
            cfg.pqa.delta_res = d;
        }
        if self.skip_and_continue {
            cfg.pqa.skip_and_continue = true;
        }
        if let Some(e) = self.epsilon {
            cfg.optimizer.epsilon = e;
        }
        if let Some(m) = self.max_iterations {
            cfg.optimizer.max_iterations = m;
        }
        if let Some(m) = self.shots {
            cfg.runtime.shots = m;
        }
    }
}

fn base_config(preset: Option<&str>, config: Option<&PathBuf>) -> Result<ExperimentConfig> {
    Ok(match (preset, config) {
        (Some(name), _) => ExperimentConfig::preset(name)?,
        (None, Some(path)) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        (None, None) => ExperimentConfig::default(),
    })
}

impl SweepArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = base_config(self.preset.as_deref(), self.config.as_ref())?;
        if !self.graph_types.is_empty() {
            cfg.graph_types = self.graph_types.clone();
        }
        if !self.graph_files.is_empty() {
            cfg.graph_files = self.graph_files.clone();
            if self.graph_types.is_empty() {
                cfg.graph_types = vec![GraphType::File];
            }
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(g) = self.graphs_per_type {
            cfg.graphs_per_type = g;
        }
        if !self.depths.is_empty() {
            cfg.depths = self.depths.clone();
        }
        if let Some(r) = self.runs_per_depth {
            cfg.runs_per_depth = r;
        }
        if self.doubling {
            cfg.runs_schedule = RunsSchedule::Doubling;
        }
        if !self.algorithms.is_empty() {
            cfg.algorithms = self.algorithms.clone();
        }
        if let Some(s) = self.master_seed {
            cfg.master_seed = s;
        }
        if !self.targets.is_empty() {
            cfg.targets = self.targets.clone();
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        self.tuning.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { sweep, out } => {
            let cfg = sweep.config()?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.join("graphs"));
            let manifest = harness::generate(&cfg, &dir)?;
            eprintln!("wrote {} graphs to {}", manifest.len(), dir.display());
        }
        Command::Solve {
            graph,
            algorithm,
            p,
            seed,
            tuning,
            config,
        } => {
            let mut cfg = base_config(None, config.as_ref())?;
            tuning.apply(&mut cfg);
            let row = harness::solve(&graph, algorithm, p, seed, &cfg)?;
            let mut stdout = io::stdout().lock();
            serde_json::to_writer(&mut stdout, &row)?;
            writeln!(stdout)?;
        }
        Command::Benchmark { sweep } => {
            let cfg = sweep.config()?;
            let out = harness::benchmark(&cfg)?;
            let failed = out.metadata.failed_rows;
            eprintln!(
                "wrote {} rows ({failed} failed) to {}",
                out.rows.len(),
                out.results_path.display()
            );
        }
        Command::Report {
            input,
            targets,
            out,
            summary,
        } => {
            if targets.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
                bail!("targets must lie in (0, 1]");
            }
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let rows = read_results(BufReader::new(file)).with_context(|| format!("reading {}", input.display()))?;
            let agg = aggregate(&rows, &targets);
            match out {
                Some(path) => write_aggregate(&agg, File::create(path)?)?,
                None => write_aggregate(&agg, io::stdout().lock())?,
            }
            if let Some(path) = summary {
                write_ar_summary(&ar_summary(&rows), File::create(path)?)?;
            }
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
