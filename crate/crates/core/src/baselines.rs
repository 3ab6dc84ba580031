//! Comparison algorithms: direct solve on the full graph, quantum local
//! search over BFS balls, classical hill climbing, and the classical
//! progressive counterpart.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::CircuitAccounting;
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, eccentricities, induced_subgraph, is_independent, Graph, VertexSubset};
use crate::metrics::{ResourceLedger, RuntimeModelConfig};
use crate::optimize::{single_run, Init, OptimizerConfig, RunResult};
use crate::pqa::{check_stop, ExitFlag, Growth, PqaConfig};

/// Optimizes the constrained ansatz on the whole graph from a random start.
pub fn ds_qaoa_plus_run<R: Rng + ?Sized>(
    g: &Graph,
    p: usize,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<RunResult> {
    single_run(g, p, Init::Random, cfg, rng)
}

pub fn ds_ledger(run: &RunResult, rt: &RuntimeModelConfig) -> ResourceLedger {
    let mut ledger = ResourceLedger::single_run();
    ledger.add_circuit(&run.accounting, run.iterations, run.evaluations, rt);
    ledger
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QlsConfig {
    pub p: usize,
    /// Ball radius; derived from the graph's eccentricities when unset.
    pub radius: Option<usize>,
    pub optimizer: OptimizerConfig,
}

impl Default for QlsConfig {
    fn default() -> Self {
        Self {
            p: 1,
            radius: None,
            optimizer: OptimizerConfig::default(),
        }
    }
}

/// Radius for local search: the smallest eccentricity, at least 1.
pub fn qls_radius(g: &Graph) -> usize {
    eccentricities(g).into_iter().min().unwrap_or(0).max(1)
}

/// The root plus every vertex within `radius` hops of it.
pub fn qls_subgraph(g: &Graph, root: usize, radius: usize) -> Result<VertexSubset> {
    if root >= g.n() {
        return Err(Error::Argument(format!("root {root} out of range")));
    }
    Ok(bfs_distances(g, root)
        .into_iter()
        .enumerate()
        .filter(|(_, d)| d.is_some_and(|d| d <= radius))
        .map(|(v, _)| v)
        .collect())
}

/// Current global assignment and local-search coverage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GlobalSolutionState {
    pub assignment: VertexSubset,
    pub touched: VertexSubset,
}

impl GlobalSolutionState {
    /// Greedily inserts each vertex of `local` that has no selected
    /// neighbor. Returns the number of adjacency queries made.
    pub fn merge(&mut self, g: &Graph, local: &VertexSubset) -> usize {
        let mut checks = 0;
        for v in local.iter() {
            if self.assignment.contains(v) {
                continue;
            }
            checks += self.assignment.len();
            if self.assignment.iter().all(|s| !g.has_edge(s, v)) {
                self.assignment.insert(v);
            }
        }
        checks
    }
}

/// One local solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QlsBall {
    pub root: usize,
    pub vertices: VertexSubset,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Local solution in original labels.
    pub selection: VertexSubset,
    pub accounting: CircuitAccounting,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QlsRunRecord {
    pub radius: usize,
    pub balls: Vec<QlsBall>,
    pub state: GlobalSolutionState,
    pub edge_checks: usize,
}

impl QlsRunRecord {
    /// Size of the merged global assignment.
    pub fn f(&self) -> f64 {
        self.state.assignment.len() as f64
    }

    /// Qubits are summed over local solves.
    pub fn ledger(&self, rt: &RuntimeModelConfig) -> ResourceLedger {
        let mut ledger = ResourceLedger::single_run();
        for b in &self.balls {
            ledger.add_circuit(&b.accounting, b.iterations, b.evaluations, rt);
        }
        ledger.qubits = ledger.qubits_sum;
        ledger.add_edge_checks(self.edge_checks, rt);
        ledger
    }
}

/// Solves balls around random untouched roots until every vertex is
/// covered, merging each local solution into the global assignment.
pub fn qls_run<R: Rng + ?Sized>(g: &Graph, cfg: &QlsConfig, rng: &mut R) -> Result<QlsRunRecord> {
    cfg.optimizer.validate()?;
    let radius = cfg.radius.unwrap_or_else(|| qls_radius(g));
    let mut state = GlobalSolutionState::default();
    let mut balls = Vec::new();
    let mut edge_checks = 0;
    loop {
        let untouched: Vec<usize> = (0..g.n()).filter(|&v| !state.touched.contains(v)).collect();
        let Some(&root) = untouched.choose(rng) else {
            break;
        };
        let vertices = qls_subgraph(g, root, radius)?;
        let sub = induced_subgraph(g, &vertices)?;
        let run = single_run(&sub.graph, cfg.p, Init::Random, &cfg.optimizer, rng)?;
        let selection = sub.to_parent(&run.best_bitstring);
        edge_checks += state.merge(g, &selection);
        for v in vertices.iter() {
            state.touched.insert(v);
        }
        balls.push(QlsBall {
            root,
            vertices,
            f: run.best_f,
            iterations: run.iterations,
            evaluations: run.evaluations,
            selection,
            accounting: run.accounting,
        });
    }
    Ok(QlsRunRecord {
        radius,
        balls,
        state,
        edge_checks,
    })
}

/// Random maximal independent set: greedy insertion in a uniformly
/// shuffled vertex order.
pub fn random_maximal_set<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> VertexSubset {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(rng);
    let mut set = VertexSubset::new();
    for v in order {
        if g.neighbors(v).iter().all(|&u| !set.contains(u)) {
            set.insert(v);
        }
    }
    set
}

/// Local search for a large independent set.
///
/// Moves, in order of preference: add a free vertex (no neighbor in the
/// set), or swap one member for two non-adjacent vertices whose only
/// neighbor in the set is that member. `max_moves` caps the number of swaps;
/// free vertices are always added, so the result is maximal.
pub fn hill_climb<R: Rng + ?Sized>(
    g: &Graph,
    init: Option<&VertexSubset>,
    rng: &mut R,
    max_moves: usize,
) -> Result<VertexSubset> {
    let mut set = match init {
        Some(s) => {
            if !is_independent(g, s)? {
                return Err(Error::Argument("initial solution is not independent".into()));
            }
            s.clone()
        }
        None => random_maximal_set(g, rng),
    };
    let n = g.n();
    // number of set members adjacent to each vertex
    let mut tight = vec![0usize; n];
    for v in set.iter() {
        for &u in g.neighbors(v) {
            tight[u] += 1;
        }
    }
    let insert = |set: &mut VertexSubset, tight: &mut [usize], v: usize| {
        set.insert(v);
        for &u in g.neighbors(v) {
            tight[u] += 1;
        }
    };
    let mut swaps = 0;
    loop {
        let mut free: Vec<usize> = (0..n).filter(|&v| !set.contains(v) && tight[v] == 0).collect();
        if !free.is_empty() {
            free.shuffle(rng);
            for v in free {
                if tight[v] == 0 {
                    insert(&mut set, &mut tight, v);
                }
            }
            continue;
        }
        if swaps >= max_moves {
            break;
        }
        let mut members = set.to_vec();
        members.shuffle(rng);
        let found = members.into_iter().find_map(|v| {
            let mut one_tight: Vec<usize> = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| tight[u] == 1)
                .collect();
            one_tight.shuffle(rng);
            one_tight.iter().enumerate().find_map(|(i, &a)| {
                one_tight[i + 1..]
                    .iter()
                    .find(|&&b| !g.has_edge(a, b))
                    .map(|&b| (v, a, b))
            })
        });
        let Some((v, a, b)) = found else {
            break;
        };
        set.remove(v);
        for &u in g.neighbors(v) {
            tight[u] -= 1;
        }
        insert(&mut set, &mut tight, a);
        insert(&mut set, &mut tight, b);
        swaps += 1;
    }
    Ok(set)
}

/// Growth and local-search settings of the classical progressive solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalPqaConfig {
    pub xi: f64,
    pub initial_size: usize,
    pub max_moves: usize,
}

impl Default for ClassicalPqaConfig {
    fn default() -> Self {
        Self::from(&PqaConfig::default())
    }
}

impl From<&PqaConfig> for ClassicalPqaConfig {
    fn from(c: &PqaConfig) -> Self {
        Self {
            xi: c.xi,
            initial_size: c.initial_size,
            max_moves: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRound {
    pub vertices: VertexSubset,
    pub added_vertex: Option<usize>,
    /// Local-search solution in original labels.
    pub solution: VertexSubset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPqaRecord {
    pub rounds: Vec<ClassicalRound>,
    pub final_set: VertexSubset,
    pub exit_flag: ExitFlag,
    pub edge_checks: usize,
}

/// Same subgraph schedule as the quantum progressive solver, with each stage
/// solved by [`hill_climb`] warm-started from the previous stage's solution.
/// The last stage's solution is then completed to a maximal set of `g`.
pub fn classical_pqa<R: Rng + ?Sized>(
    g: &Graph,
    cfg: &ClassicalPqaConfig,
    rng: &mut R,
) -> Result<ClassicalPqaRecord> {
    if !(cfg.xi > 0.0) || cfg.initial_size == 0 {
        return Err(Error::Config("xi and initial_size must be positive".into()));
    }
    if g.n() == 0 {
        return Err(Error::Argument("graph has no vertices".into()));
    }
    let mut growth_rng = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut solve_rng = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut growth = Growth::start(g, cfg.initial_size.min(g.n()), &mut growth_rng)?;

    let mut rounds: Vec<ClassicalRound> = Vec::new();
    let mut history = Vec::new();
    let mut added_vertex = None;
    let exit_flag = loop {
        let sub = induced_subgraph(g, growth.vertices())?;
        let init = rounds.last().map(|r| sub.localize(&r.solution));
        let local = hill_climb(&sub.graph, init.as_ref(), &mut solve_rng, cfg.max_moves)?;
        let solution = sub.to_parent(&local);
        history.push(solution.len() as f64);
        rounds.push(ClassicalRound {
            vertices: growth.vertices().clone(),
            added_vertex,
            solution,
        });
        if check_stop(&history, cfg.xi) {
            break ExitFlag::StopCondition;
        }
        if growth.is_full() {
            break ExitFlag::FullGraph;
        }
        added_vertex = Some(growth.grow(&mut growth_rng)?.0);
    };
    // an early stop leaves vertices outside the last subgraph; fill in the
    // free ones so the answer is maximal in `g`
    let last = &rounds.last().expect("at least one round").solution;
    let outside = g.n() - growth.vertices().len();
    let completion_checks = outside * last.len();
    let final_set = hill_climb(g, Some(last), &mut solve_rng, 0)?;
    Ok(ClassicalPqaRecord {
        final_set,
        rounds,
        exit_flag,
        edge_checks: growth.edge_checks() + completion_checks,
    })
}
