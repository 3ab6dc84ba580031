//! Experiment sweeps: configuration, instance generation, seeded execution
//! of every algorithm, and the CSV/JSON artifacts they produce.

mod report;
mod run;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{ClassicalPqaConfig, QlsConfig};
use crate::error::{Error, Result};
use crate::graph::{gen_er, gen_regular, Graph};
use crate::metrics::{f_max, FMax, RuntimeModelConfig};
use crate::optimize::OptimizerConfig;
use crate::pqa::PqaConfig;
use crate::sim::MAX_QUBITS;

pub use report::{
    aggregate, ar_summary, graph_totals, read_results, write_aggregate, write_ar_summary, AggregateRow,
    DepthSummary, GraphTotal,
};
pub use run::{benchmark, execute, solve, write_results, BenchmarkOutput, Metadata, RunRow, FAILED_FLAG};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphType {
    Er04,
    Er05,
    Reg3,
    File,
}

impl GraphType {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphType::Er04 => "er04",
            GraphType::Er05 => "er05",
            GraphType::Reg3 => "reg3",
            GraphType::File => "file",
        }
    }

    /// Draws one instance; `None` for [`GraphType::File`].
    pub fn generate(self, n: usize, rng: &mut ChaCha8Rng) -> Option<Result<Graph>> {
        match self {
            GraphType::Er04 => Some(gen_er(n, 0.4, rng)),
            GraphType::Er05 => Some(gen_er(n, 0.5, rng)),
            GraphType::Reg3 => Some(gen_regular(n, 3, rng)),
            GraphType::File => None,
        }
    }
}

impl fmt::Display for GraphType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "er04" => Ok(GraphType::Er04),
            "er05" => Ok(GraphType::Er05),
            "reg3" => Ok(GraphType::Reg3),
            "file" => Ok(GraphType::File),
            _ => Err(Error::Argument(format!("unknown graph type `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pqa,
    Ds,
    Qls,
    Hill,
    Cpqa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Pqa,
        Algorithm::Ds,
        Algorithm::Qls,
        Algorithm::Hill,
        Algorithm::Cpqa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Pqa => "pqa",
            Algorithm::Ds => "ds",
            Algorithm::Qls => "qls",
            Algorithm::Hill => "hill",
            Algorithm::Cpqa => "cpqa",
        }
    }

    pub fn is_quantum(self) -> bool {
        matches!(self, Algorithm::Pqa | Algorithm::Ds | Algorithm::Qls)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown algorithm `{s}` (expected pqa, ds, qls, hill or cpqa)")))
    }
}

/// How many runs each depth receives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunsSchedule {
    /// `runs_per_depth` at every depth.
    #[default]
    Fixed,
    /// `runs_per_depth` up to depth 6, `2^p` beyond.
    Doubling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph_types: Vec<GraphType>,
    pub n: usize,
    pub graphs_per_type: usize,
    /// Edge-list inputs for the `file` graph type.
    pub graph_files: Vec<PathBuf>,
    pub depths: Vec<usize>,
    pub runs_per_depth: usize,
    pub runs_schedule: RunsSchedule,
    pub algorithms: Vec<Algorithm>,
    pub master_seed: u64,
    pub targets: Vec<f64>,
    /// Shared by every quantum algorithm; overrides the optimizer blocks of
    /// the `pqa` and `qls` sections.
    pub optimizer: OptimizerConfig,
    /// Depth and optimizer are set per run.
    pub pqa: PqaConfig,
    /// Depth and optimizer are set per run.
    pub qls: QlsConfig,
    pub classical: ClassicalPqaConfig,
    pub runtime: RuntimeModelConfig,
    pub output_dir: PathBuf,
    /// Thread count for the sweep; all cores when unset.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            graph_types: vec![GraphType::Er05],
            n: 14,
            graphs_per_type: 20,
            graph_files: Vec::new(),
            depths: (1..=5).collect(),
            runs_per_depth: 100,
            runs_schedule: RunsSchedule::Fixed,
            algorithms: Algorithm::ALL.to_vec(),
            master_seed: 0,
            targets: vec![0.8, 0.85, 0.9, 0.95, 1.0],
            optimizer: OptimizerConfig::default(),
            pqa: PqaConfig::default(),
            qls: QlsConfig::default(),
            classical: ClassicalPqaConfig::default(),
            runtime: RuntimeModelConfig::default(),
            output_dir: PathBuf::from("results"),
            workers: None,
        }
    }
}

pub const PRESETS: [&str; 6] = ["full-er04", "full-er05", "full-reg3", "full", "scaled", "smoke"];

impl ExperimentConfig {
    /// Named sweep configurations.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self::default();
        let cfg = match name {
            "full-er04" => Self {
                graph_types: vec![GraphType::Er04],
                ..base
            },
            "full-er05" => Self {
                graph_types: vec![GraphType::Er05],
                ..base
            },
            "full-reg3" => Self {
                graph_types: vec![GraphType::Reg3],
                ..base
            },
            "full" => Self {
                graph_types: vec![GraphType::Er04, GraphType::Er05, GraphType::Reg3],
                ..base
            },
            "scaled" => Self {
                graph_types: vec![GraphType::Er05, GraphType::Reg3],
                n: 12,
                graphs_per_type: 5,
                depths: (1..=4).collect(),
                runs_per_depth: 50,
                algorithms: vec![Algorithm::Pqa, Algorithm::Ds, Algorithm::Qls],
                ..base
            },
            "smoke" => Self {
                graph_types: vec![GraphType::Er05, GraphType::Reg3],
                n: 8,
                graphs_per_type: 2,
                depths: vec![1, 2],
                runs_per_depth: 3,
                ..base
            },
            _ => {
                return Err(Error::Config(format!(
                    "unknown preset `{name}` (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.graph_types.is_empty() {
            return Err(Error::Config("graph_types is empty".into()));
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return Err(Error::Config("depths must be a nonempty list of positive values".into()));
        }
        if self.runs_per_depth == 0 {
            return Err(Error::Config("runs_per_depth must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("algorithms is empty".into()));
        }
        let generated = self.graph_types.iter().any(|t| *t != GraphType::File);
        if generated && (self.n == 0 || self.n > MAX_QUBITS) {
            return Err(Error::Config(format!("n = {} outside 1..={MAX_QUBITS}", self.n)));
        }
        if self.graph_types.contains(&GraphType::File) && self.graph_files.is_empty() {
            return Err(Error::Config("graph type `file` needs graph_files".into()));
        }
        if self.targets.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(Error::Config("targets must lie in (0, 1]".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.optimizer.validate()?;
        self.runtime.validate()?;
        self.pqa_config(1).validate()
    }

    pub fn runs_at(&self, p: usize) -> usize {
        match self.runs_schedule {
            RunsSchedule::Fixed => self.runs_per_depth,
            RunsSchedule::Doubling if p <= 6 => self.runs_per_depth,
            RunsSchedule::Doubling => 1usize << p.min(62),
        }
    }

    pub fn pqa_config(&self, p: usize) -> PqaConfig {
        PqaConfig {
            p,
            optimizer: self.optimizer.clone(),
            ..self.pqa.clone()
        }
    }

    pub fn qls_config(&self, p: usize) -> QlsConfig {
        QlsConfig {
            p,
            optimizer: self.optimizer.clone(),
            ..self.qls.clone()
        }
    }

    pub fn expected_rows(&self, graphs: usize) -> usize {
        let per_graph: usize = self.depths.iter().map(|&p| self.runs_at(p)).sum();
        graphs * per_graph * self.algorithms.len()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Platform-independent 64-bit hash of a sequence of byte strings.
fn stable_hash(master_seed: u64, parts: &[&[u8]]) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = splitmix64(master_seed) ^ FNV_OFFSET;
    for part in parts {
        for &b in (part.len() as u64).to_le_bytes().iter().chain(part.iter()) {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    splitmix64(h)
}

/// Seed of one run, independent of scheduling order.
pub fn derive_seed(master_seed: u64, graph_id: &str, algorithm: Algorithm, p: usize, run_index: usize) -> u64 {
    stable_hash(
        master_seed,
        &[
            b"run",
            graph_id.as_bytes(),
            algorithm.as_str().as_bytes(),
            &(p as u64).to_le_bytes(),
            &(run_index as u64).to_le_bytes(),
        ],
    )
}

pub fn graph_seed(master_seed: u64, graph_type: GraphType, index: usize) -> u64 {
    stable_hash(
        master_seed,
        &[b"graph", graph_type.as_str().as_bytes(), &(index as u64).to_le_bytes()],
    )
}

fn f_max_seed(master_seed: u64, graph_id: &str) -> u64 {
    stable_hash(master_seed, &[b"f_max", graph_id.as_bytes()])
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphInstance {
    pub id: String,
    pub graph_type: GraphType,
    /// Generator seed; `None` for graphs read from files.
    pub seed: Option<u64>,
    pub graph: Graph,
    /// Source file for the `file` graph type.
    pub source: Option<PathBuf>,
}

impl GraphInstance {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let graph = Graph::read_edge_list(path)?;
        if graph.n() == 0 || graph.n() > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "graph vertices",
                got: graph.n(),
                limit: MAX_QUBITS,
            });
        }
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Argument(format!("cannot derive a graph id from {}", path.display())))?
            .to_string();
        Ok(Self {
            id,
            graph_type: GraphType::File,
            seed: None,
            graph,
            source: Some(path.to_path_buf()),
        })
    }

    pub fn f_max(&self, master_seed: u64) -> Result<FMax> {
        let mut rng = ChaCha8Rng::seed_from_u64(f_max_seed(master_seed, &self.id));
        f_max(&self.graph, &mut rng)
    }
}

/// Builds every instance the config describes, in canonical order.
pub fn instances(cfg: &ExperimentConfig) -> Result<Vec<GraphInstance>> {
    let mut out = Vec::new();
    for &ty in &cfg.graph_types {
        if ty == GraphType::File {
            for path in &cfg.graph_files {
                out.push(GraphInstance::from_file(path)?);
            }
            continue;
        }
        for index in 0..cfg.graphs_per_type {
            let seed = graph_seed(cfg.master_seed, ty, index);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let graph = ty.generate(cfg.n, &mut rng).expect("generated type")?;
            out.push(GraphInstance {
                id: format!("{ty}_{index:02}"),
                graph_type: ty,
                seed: Some(seed),
                graph,
                source: None,
            });
        }
    }
    let mut ids: Vec<&str> = out.iter().map(|g| g.id.as_str()).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("graph ids are not unique".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub graph_id: String,
    pub graph_type: GraphType,
    pub seed: Option<u64>,
    pub file: String,
    pub n: usize,
    pub m: usize,
}

/// Writes one edge-list file per instance and `manifest.json` into `dir`.
pub fn generate(cfg: &ExperimentConfig, dir: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    cfg.validate()?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut manifest = Vec::new();
    for inst in instances(cfg)? {
        let file = format!("{}.txt", inst.id);
        inst.graph.write_edge_list(dir.join(&file))?;
        manifest.push(ManifestEntry {
            graph_id: inst.id,
            graph_type: inst.graph_type,
            seed: inst.seed,
            file,
            n: inst.graph.n(),
            m: inst.graph.m(),
        });
    }
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(dir.join("manifest.json"), json)?;
    Ok(manifest)
}
