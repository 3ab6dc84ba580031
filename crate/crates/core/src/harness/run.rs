use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{aggregate, ar_summary, write_aggregate, write_ar_summary, AggregateRow};
use super::{derive_seed, instances, Algorithm, ExperimentConfig, GraphInstance, GraphType, RunsSchedule};
use crate::baselines::{classical_pqa, ds_ledger, ds_qaoa_plus_run, hill_climb, qls_run};
use crate::error::{Error, Result};
use crate::metrics::{approximation_ratio, FMax, ResourceLedger};
use crate::pqa::{pqa_run, ExitFlag};

/// Exit flag of a run that returned an error.
pub const FAILED_FLAG: &str = "failed";

/// One line of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub algorithm: Algorithm,
    pub graph_id: String,
    pub graph_type: GraphType,
    pub n: usize,
    pub seed: u64,
    pub p: usize,
    #[serde(rename = "F")]
    pub f: Option<f64>,
    #[serde(rename = "F_max")]
    pub f_max: f64,
    #[serde(rename = "AR")]
    pub ar: Option<f64>,
    pub iterations: u64,
    pub evaluations: u64,
    pub qubits_peak: u64,
    pub qubits_sum: u64,
    pub multi_ctrl_rx_gates: u64,
    #[serde(rename = "edge_checks_J")]
    pub edge_checks: u64,
    #[serde(rename = "modeled_runtime_s")]
    pub modeled_runtime: f64,
    pub exit_flag: String,
}

impl RunRow {
    pub fn failed(&self) -> bool {
        self.exit_flag == FAILED_FLAG
    }

    /// The per-run qubit figure used in totals.
    pub fn qubits(&self) -> u64 {
        match self.algorithm {
            Algorithm::Qls => self.qubits_sum,
            _ => self.qubits_peak,
        }
    }

    pub fn ledger(&self) -> ResourceLedger {
        ResourceLedger {
            runs: 1.0,
            iterations: self.iterations as f64,
            evaluations: self.evaluations as f64,
            qubits: self.qubits() as f64,
            qubits_peak: self.qubits_peak as f64,
            qubits_sum: self.qubits_sum as f64,
            multi_ctrl_rx_gates: self.multi_ctrl_rx_gates as f64,
            edge_checks: self.edge_checks as f64,
            modeled_runtime: self.modeled_runtime,
        }
    }

    /// Checks the row's internal consistency.
    pub fn validate(&self) -> Result<()> {
        if self.failed() {
            return Ok(());
        }
        if ExitFlag::parse(&self.exit_flag).is_none() {
            return Err(Error::Argument(format!("unknown exit flag `{}`", self.exit_flag)));
        }
        let (Some(f), Some(ar)) = (self.f, self.ar) else {
            return Err(Error::Argument("completed row without F or AR".into()));
        };
        if (ar - f / self.f_max).abs() > 1e-9 {
            return Err(Error::Argument(format!("AR {ar} != F/F_max = {}", f / self.f_max)));
        }
        if !(-1e-9..=1.0 + 1e-9).contains(&ar) {
            return Err(Error::Argument(format!("AR {ar} outside [0, 1]")));
        }
        Ok(())
    }
}

struct Outcome {
    f: f64,
    ledger: ResourceLedger,
    exit_flag: ExitFlag,
}

fn run_algorithm(inst: &GraphInstance, algorithm: Algorithm, p: usize, seed: u64, cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = &inst.graph;
    let rt = &cfg.runtime;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome = match algorithm {
        Algorithm::Pqa => {
            let rec = pqa_run(g, &cfg.pqa_config(p), &mut rng)?;
            Outcome {
                f: rec.final_f,
                ledger: rec.ledger(rt),
                exit_flag: rec.exit_flag,
            }
        }
        Algorithm::Ds => {
            let run = ds_qaoa_plus_run(g, p, &cfg.optimizer, &mut rng)?;
            Outcome {
                f: run.best_f,
                ledger: ds_ledger(&run, rt),
                exit_flag: ExitFlag::None,
            }
        }
        Algorithm::Qls => {
            let rec = qls_run(g, &cfg.qls_config(p), &mut rng)?;
            Outcome {
                f: rec.f(),
                ledger: rec.ledger(rt),
                exit_flag: ExitFlag::None,
            }
        }
        Algorithm::Hill => {
            let set = hill_climb(g, None, &mut rng, cfg.classical.max_moves)?;
            Outcome {
                f: set.len() as f64,
                ledger: ResourceLedger::single_run(),
                exit_flag: ExitFlag::None,
            }
        }
        Algorithm::Cpqa => {
            let rec = classical_pqa(g, &cfg.classical, &mut rng)?;
            let mut ledger = ResourceLedger::single_run();
            ledger.add_edge_checks(rec.edge_checks, rt);
            Outcome {
                f: rec.final_set.len() as f64,
                ledger,
                exit_flag: rec.exit_flag,
            }
        }
    };
    Ok(outcome)
}

fn blank_row(inst: &GraphInstance, f_max: &FMax, algorithm: Algorithm, p: usize, seed: u64) -> RunRow {
    RunRow {
        algorithm,
        graph_id: inst.id.clone(),
        graph_type: inst.graph_type,
        n: inst.graph.n(),
        seed,
        p,
        f: None,
        f_max: f_max.value,
        ar: None,
        iterations: 0,
        evaluations: 0,
        qubits_peak: 0,
        qubits_sum: 0,
        multi_ctrl_rx_gates: 0,
        edge_checks: 0,
        modeled_runtime: 0.0,
        exit_flag: FAILED_FLAG.to_string(),
    }
}

fn try_execute(
    inst: &GraphInstance,
    f_max: &FMax,
    algorithm: Algorithm,
    p: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<RunRow> {
    let o = run_algorithm(inst, algorithm, p, seed, cfg)?;
    let ar = approximation_ratio(o.f, f_max.value)?;
    let l = &o.ledger;
    Ok(RunRow {
        f: Some(o.f),
        ar: Some(ar),
        iterations: l.iterations.round() as u64,
        evaluations: l.evaluations.round() as u64,
        qubits_peak: l.qubits_peak.round() as u64,
        qubits_sum: l.qubits_sum.round() as u64,
        multi_ctrl_rx_gates: l.multi_ctrl_rx_gates.round() as u64,
        edge_checks: l.edge_checks.round() as u64,
        modeled_runtime: l.modeled_runtime,
        exit_flag: o.exit_flag.to_string(),
        ..blank_row(inst, f_max, algorithm, p, seed)
    })
}

/// Runs one algorithm once. Errors become a row flagged [`FAILED_FLAG`].
pub fn execute(
    inst: &GraphInstance,
    f_max: &FMax,
    algorithm: Algorithm,
    p: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> RunRow {
    try_execute(inst, f_max, algorithm, p, seed, cfg).unwrap_or_else(|e| {
        log::warn!("{algorithm} on {} (p={p}, seed={seed}) failed: {e}", inst.id);
        blank_row(inst, f_max, algorithm, p, seed)
    })
}

/// Single run on an edge-list file; errors are returned rather than
/// recorded.
pub fn solve(path: impl AsRef<Path>, algorithm: Algorithm, p: usize, seed: u64, cfg: &ExperimentConfig) -> Result<RunRow> {
    if p == 0 {
        return Err(Error::Argument("depth p must be at least 1".into()));
    }
    let inst = GraphInstance::from_file(path)?;
    let fm = inst.f_max(cfg.master_seed)?;
    try_execute(&inst, &fm, algorithm, p, seed, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphMetadata {
    pub graph_id: String,
    pub graph_type: GraphType,
    pub seed: Option<u64>,
    pub source: Option<PathBuf>,
    pub n: usize,
    pub m: usize,
    pub f_max: f64,
    pub f_max_exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub runs_schedule: RunsSchedule,
    /// Runs per depth actually used.
    pub runs_at_depth: Vec<(usize, usize)>,
    pub config: ExperimentConfig,
    pub graphs: Vec<GraphMetadata>,
    pub rows: usize,
    pub failed_rows: usize,
}

#[derive(Clone, Debug)]
pub struct BenchmarkOutput {
    pub rows: Vec<RunRow>,
    pub aggregate: Vec<AggregateRow>,
    pub metadata: Metadata,
    pub results_path: PathBuf,
}

pub fn write_results<W: Write>(rows: &[RunRow], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Full sweep over graphs, algorithms, depths and runs. Writes
/// `results.csv`, `aggregate.csv`, `ar_summary.csv`, `metadata.json` and the
/// instances under `graphs/` into the configured output directory.
pub fn benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkOutput> {
    cfg.validate()?;
    let graphs = instances(cfg)?;
    let f_maxes = graphs
        .iter()
        .map(|g| g.f_max(cfg.master_seed))
        .collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::with_capacity(cfg.expected_rows(graphs.len()));
    for (gi, inst) in graphs.iter().enumerate() {
        for &algorithm in &cfg.algorithms {
            for &p in &cfg.depths {
                for run in 0..cfg.runs_at(p) {
                    jobs.push((gi, algorithm, p, derive_seed(cfg.master_seed, &inst.id, algorithm, p, run)));
                }
            }
        }
    }
    log::info!("benchmark: {} graphs, {} runs", graphs.len(), jobs.len());
    let pool = thread_pool(cfg.workers)?;
    let rows: Vec<RunRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(gi, algorithm, p, seed)| execute(&graphs[gi], &f_maxes[gi], algorithm, p, seed, cfg))
            .collect()
    });

    let dir = &cfg.output_dir;
    let graph_dir = dir.join("graphs");
    fs::create_dir_all(&graph_dir)?;
    for inst in &graphs {
        inst.graph.write_edge_list(graph_dir.join(format!("{}.txt", inst.id)))?;
    }
    let results_path = dir.join("results.csv");
    write_results(&rows, fs::File::create(&results_path)?)?;
    let agg = aggregate(&rows, &cfg.targets);
    write_aggregate(&agg, fs::File::create(dir.join("aggregate.csv"))?)?;
    write_ar_summary(&ar_summary(&rows), fs::File::create(dir.join("ar_summary.csv"))?)?;

    let metadata = Metadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        runs_schedule: cfg.runs_schedule,
        runs_at_depth: cfg.depths.iter().map(|&p| (p, cfg.runs_at(p))).collect(),
        config: cfg.clone(),
        graphs: graphs
            .iter()
            .zip(&f_maxes)
            .map(|(g, fm)| GraphMetadata {
                graph_id: g.id.clone(),
                graph_type: g.graph_type,
                seed: g.seed,
                source: g.source.clone(),
                n: g.graph.n(),
                m: g.graph.m(),
                f_max: fm.value,
                f_max_exact: fm.exact,
            })
            .collect(),
        rows: rows.len(),
        failed_rows: rows.iter().filter(|r| r.failed()).count(),
    };
    let mut json = serde_json::to_string_pretty(&metadata)?;
    json.push('\n');
    fs::write(dir.join("metadata.json"), json)?;

    Ok(BenchmarkOutput {
        rows,
        aggregate: agg,
        metadata,
        results_path,
    })
}
