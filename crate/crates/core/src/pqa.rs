//! Progressive solving: grow a sparse induced subgraph one vertex at a time,
//! re-optimizing the constrained ansatz on each stage from the previous
//! stage's angles.
//!
//! Growth and solving draw from separate random streams split off the
//! caller's RNG, so that the quantum and classical progressive solvers visit
//! identical subgraph sequences for the same seed.

use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzParams, CircuitAccounting, QaoaPlusAnsatz};
use crate::error::{Error, Result};
use crate::graph::{closeness, induced_subgraph, min_degree_vertex, Graph, VertexSubset};
use crate::metrics::{ResourceLedger, RuntimeModelConfig};
use crate::optimize::{optimize_ansatz, OptimizerConfig, RunResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PqaConfig {
    /// Tolerance on consecutive round values for the stop condition.
    pub xi: f64,
    /// Vertices in the first subgraph; clamped to the graph size.
    pub initial_size: usize,
    /// Skip the round when the transferred angles score below this fraction
    /// of the previous round's value.
    pub delta_init: f64,
    /// Stop growing when a round scores below this fraction of the best
    /// round so far.
    pub delta_res: f64,
    pub p: usize,
    /// When the first mechanism fires, keep growing instead of ending the run.
    pub skip_and_continue: bool,
    pub optimizer: OptimizerConfig,
}

impl Default for PqaConfig {
    fn default() -> Self {
        Self {
            xi: 0.1,
            initial_size: 3,
            delta_init: 0.5,
            delta_res: 0.8,
            p: 1,
            skip_and_continue: false,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl PqaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0) {
            return Err(Error::Config(format!("xi = {} must be positive", self.xi)));
        }
        if self.initial_size == 0 {
            return Err(Error::Config("initial_size must be at least 1".into()));
        }
        if self.p == 0 {
            return Err(Error::Config("depth p must be at least 1".into()));
        }
        for (name, v) in [("delta_init", self.delta_init), ("delta_res", self.delta_res)] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
            if v > 1.0 {
                log::warn!("{name} = {v} exceeds 1; the corresponding exit will always fire");
            }
        }
        self.optimizer.validate()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitFlag {
    #[default]
    None,
    InitExit,
    ResultExit,
    StopCondition,
    FullGraph,
}

impl ExitFlag {
    pub const ALL: [ExitFlag; 5] = [
        ExitFlag::None,
        ExitFlag::InitExit,
        ExitFlag::ResultExit,
        ExitFlag::StopCondition,
        ExitFlag::FullGraph,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExitFlag::None => "none",
            ExitFlag::InitExit => "init_exit",
            ExitFlag::ResultExit => "result_exit",
            ExitFlag::StopCondition => "stop_condition",
            ExitFlag::FullGraph => "full_graph",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

impl fmt::Display for ExitFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Edges between `new_vertex` and the current members, as `(min, max)`
/// pairs in ascending order of the member.
pub fn expand_edges(g: &Graph, current: &VertexSubset, new_vertex: usize) -> Result<Vec<(usize, usize)>> {
    if current.contains(new_vertex) {
        return Err(Error::Argument(format!("vertex {new_vertex} already in the subgraph")));
    }
    Ok(current
        .iter()
        .filter(|&q| g.has_edge(q, new_vertex))
        .map(|q| (q.min(new_vertex), q.max(new_vertex)))
        .collect())
}

/// Picks the candidate with the fewest edges into `current`. Ties are
/// resolved by a one-step lookahead: the tied vertex whose addition leaves
/// the smallest minimum closeness among the remaining candidates wins, and
/// any remaining tie is broken uniformly at random.
pub fn next_vertex<R: Rng + ?Sized>(g: &Graph, current: &VertexSubset, rng: &mut R) -> Result<usize> {
    let mut checks = 0;
    next_vertex_counted(g, current, rng, &mut checks)
}

/// Lookahead scores of the tied minimum-closeness candidates, as
/// `(candidate, score)`. A single minimizer is returned with score `None`.
pub fn tie_lookahead(g: &Graph, current: &VertexSubset) -> Result<Vec<(usize, Option<usize>)>> {
    let mut checks = 0;
    tie_lookahead_counted(g, current, &mut checks)
}

fn tie_lookahead_counted(
    g: &Graph,
    current: &VertexSubset,
    checks: &mut usize,
) -> Result<Vec<(usize, Option<usize>)>> {
    let candidates: Vec<usize> = (0..g.n()).filter(|&v| !current.contains(v)).collect();
    if candidates.is_empty() {
        return Err(Error::Argument("no candidate vertices left".into()));
    }
    let scores = candidates
        .iter()
        .map(|&c| {
            *checks += current.len();
            closeness(g, current, c)
        })
        .collect::<Result<Vec<_>>>()?;
    let min = *scores.iter().min().expect("nonempty");
    let tied: Vec<usize> = candidates
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s == min)
        .map(|(&c, _)| c)
        .collect();
    if tied.len() == 1 {
        return Ok(vec![(tied[0], None)]);
    }
    tied.iter()
        .map(|&t| {
            let mut extended = current.clone();
            extended.insert(t);
            let mut best: Option<usize> = None;
            for &c in candidates.iter().filter(|&&c| c != t) {
                *checks += extended.len();
                let s = closeness(g, &extended, c)?;
                best = Some(best.map_or(s, |b| b.min(s)));
            }
            // completing the graph leaves nothing to connect to
            Ok((t, Some(best.unwrap_or(0))))
        })
        .collect()
}

fn next_vertex_counted<R: Rng + ?Sized>(
    g: &Graph,
    current: &VertexSubset,
    rng: &mut R,
    checks: &mut usize,
) -> Result<usize> {
    let scored = tie_lookahead_counted(g, current, checks)?;
    if let [(v, None)] = scored.as_slice() {
        return Ok(*v);
    }
    let min = scored.iter().filter_map(|(_, s)| *s).min().expect("tied set is nonempty");
    let finalists: Vec<usize> = scored
        .iter()
        .filter(|(_, s)| *s == Some(min))
        .map(|(v, _)| *v)
        .collect();
    Ok(*finalists.choose(rng).expect("nonempty"))
}

/// Seeds the subgraph with a minimum-degree vertex and grows it to `k0`
/// vertices with [`next_vertex`].
pub fn build_initial_subgraph<R: Rng + ?Sized>(g: &Graph, k0: usize, rng: &mut R) -> Result<VertexSubset> {
    Ok(Growth::start(g, k0, rng)?.vertices)
}

/// `true` once the last three round values agree to within `xi` pairwise.
pub fn check_stop(history: &[f64], xi: f64) -> bool {
    match history {
        [.., a, b, c] => (c - b).abs() <= xi && (b - a).abs() <= xi,
        _ => false,
    }
}

/// Subgraph schedule shared by the quantum and classical progressive
/// solvers. Counts every vertex-pair adjacency query it makes.
pub struct Growth<'g> {
    g: &'g Graph,
    vertices: VertexSubset,
    order: Vec<usize>,
    edge_checks: usize,
}

impl<'g> Growth<'g> {
    pub fn start<R: Rng + ?Sized>(g: &'g Graph, k0: usize, rng: &mut R) -> Result<Self> {
        if k0 == 0 || k0 > g.n() {
            return Err(Error::Argument(format!(
                "initial size {k0} outside 1..={}",
                g.n()
            )));
        }
        let first = min_degree_vertex(g, rng)?;
        let mut growth = Self {
            g,
            vertices: VertexSubset::from([first]),
            order: vec![first],
            edge_checks: 0,
        };
        while growth.vertices.len() < k0 {
            growth.grow(rng)?;
        }
        Ok(growth)
    }

    /// Adds one vertex; returns it with the edges it brings along.
    pub fn grow<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(usize, Vec<(usize, usize)>)> {
        let v = next_vertex_counted(self.g, &self.vertices, rng, &mut self.edge_checks)?;
        self.edge_checks += self.vertices.len();
        let edges = expand_edges(self.g, &self.vertices, v)?;
        self.vertices.insert(v);
        self.order.push(v);
        Ok((v, edges))
    }

    pub fn vertices(&self) -> &VertexSubset {
        &self.vertices
    }

    /// Vertices in the order they joined.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_full(&self) -> bool {
        self.vertices.len() == self.g.n()
    }

    pub fn edge_checks(&self) -> usize {
        self.edge_checks
    }
}

/// One optimization round on one subgraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Subgraph vertex set in original labels.
    pub vertices: VertexSubset,
    pub added_vertex: Option<usize>,
    pub added_edges: Vec<(usize, usize)>,
    /// Value at the transferred angles, before optimizing.
    pub f_init: Option<f64>,
    /// Best value this round (equals `f_init` when optimization was skipped).
    pub f: f64,
    pub optimized: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub x0: AnsatzParams,
    pub params: AnsatzParams,
    /// Most probable basis state, in original labels.
    pub bitstring: VertexSubset,
    pub accounting: CircuitAccounting,
    pub exit_flag: ExitFlag,
}

/// Full trace of a progressive run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PqaRunRecord {
    pub rounds: Vec<RoundRecord>,
    /// Round whose state is the run's output.
    pub final_round: usize,
    pub final_f: f64,
    pub final_bitstring: VertexSubset,
    pub exit_flag: ExitFlag,
    pub edge_checks: usize,
}

impl PqaRunRecord {
    /// Resource totals of this run under the given runtime model.
    pub fn ledger(&self, rt: &RuntimeModelConfig) -> ResourceLedger {
        let mut ledger = ResourceLedger::single_run();
        for r in &self.rounds {
            ledger.add_circuit(&r.accounting, r.iterations, r.evaluations, rt);
        }
        ledger.add_edge_checks(self.edge_checks, rt);
        ledger
    }

    /// One JSON object per round.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.rounds {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn round_from_run(
    round: usize,
    sub_labels: &crate::graph::InducedSubgraph,
    added: Option<(usize, Vec<(usize, usize)>)>,
    f_init: Option<f64>,
    run: RunResult,
) -> RoundRecord {
    let (added_vertex, added_edges) = match added {
        Some((v, e)) => (Some(v), e),
        None => (None, Vec::new()),
    };
    RoundRecord {
        round,
        vertices: sub_labels.labels.iter().copied().collect(),
        added_vertex,
        added_edges,
        f_init,
        f: run.best_f,
        optimized: true,
        iterations: run.iterations,
        evaluations: run.evaluations,
        x0: run.initial_params,
        params: run.best_params,
        bitstring: sub_labels.to_parent(&run.best_bitstring),
        accounting: run.accounting,
        exit_flag: ExitFlag::None,
    }
}

/// Runs the progressive algorithm on `g`.
pub fn pqa_run<R: Rng + ?Sized>(g: &Graph, cfg: &PqaConfig, rng: &mut R) -> Result<PqaRunRecord> {
    cfg.validate()?;
    if g.n() == 0 {
        return Err(Error::Argument("graph has no vertices".into()));
    }
    let mut growth_rng = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut solve_rng = ChaCha8Rng::seed_from_u64(rng.gen());

    let k0 = cfg.initial_size.min(g.n());
    let mut growth = Growth::start(g, k0, &mut growth_rng)?;
    let sub = induced_subgraph(g, growth.vertices())?;
    let ansatz = QaoaPlusAnsatz::new(&sub.graph)?;
    let x0 = AnsatzParams::random(cfg.p, &mut solve_rng)?;
    let run = optimize_ansatz(&sub.graph, &ansatz, x0, &cfg.optimizer)?;

    let mut rounds = vec![round_from_run(0, &sub, None, None, run)];
    let mut history = vec![rounds[0].f];
    // index of the last optimized round and of the best optimized round
    let mut last = 0;
    let mut best = 0;

    let (final_round, exit_flag) = loop {
        let i = rounds.len() - 1;
        if rounds[i].optimized {
            if check_stop(&history, cfg.xi) {
                break (i, ExitFlag::StopCondition);
            }
        }
        if growth.is_full() {
            let out = if rounds[i].optimized { i } else { last };
            break (out, ExitFlag::FullGraph);
        }

        let added = growth.grow(&mut growth_rng)?;
        let sub = induced_subgraph(g, growth.vertices())?;
        let ansatz = QaoaPlusAnsatz::new(&sub.graph)?;
        let transferred = rounds[last].params.clone();
        let f_init = ansatz.expectation(&transferred);
        let round = rounds.len();

        if f_init < cfg.delta_init * rounds[last].f {
            let state = ansatz.state(&transferred);
            rounds.push(RoundRecord {
                round,
                vertices: growth.vertices().clone(),
                added_vertex: Some(added.0),
                added_edges: added.1,
                f_init: Some(f_init),
                f: f_init,
                optimized: false,
                // the check is one full estimate of F on this circuit
                iterations: 1,
                evaluations: 1,
                x0: transferred.clone(),
                params: transferred,
                bitstring: sub.to_parent(&VertexSubset::from_mask(state.argmax_index() as u64)),
                accounting: crate::ansatz::account_circuit(
                    &sub.graph,
                    cfg.p,
                    crate::ansatz::Encoding::QaoaPlus,
                ),
                exit_flag: ExitFlag::None,
            });
            if cfg.skip_and_continue {
                continue;
            }
            break (last, ExitFlag::InitExit);
        }

        let run = optimize_ansatz(&sub.graph, &ansatz, transferred, &cfg.optimizer)?;
        rounds.push(round_from_run(round, &sub, Some(added), Some(f_init), run));
        let f = rounds[round].f;
        if f < cfg.delta_res * rounds[best].f {
            break (best, ExitFlag::ResultExit);
        }
        history.push(f);
        last = round;
        if f > rounds[best].f {
            best = round;
        }
    };

    let last_idx = rounds.len() - 1;
    rounds[last_idx].exit_flag = exit_flag;
    Ok(PqaRunRecord {
        final_f: rounds[final_round].f,
        final_bitstring: rounds[final_round].bitstring.clone(),
        final_round,
        exit_flag,
        edge_checks: growth.edge_checks(),
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{brute_force_mis, is_independent};

    fn hub5() -> Graph {
        Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (3, 4)]).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn expansion_from_012() {
        let g = hub5();
        let current = VertexSubset::from([0, 1, 2]);
        assert_eq!(
            tie_lookahead(&g, &current).unwrap(),
            vec![(3, Some(2)), (4, Some(2))]
        );
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..40 {
            let v = next_vertex(&g, &current, &mut rng(seed)).unwrap();
            seen.insert(v);
            let edges = expand_edges(&g, &current, v).unwrap();
            assert_eq!(edges, vec![(0, v)]);
        }
        assert_eq!(seen, std::collections::BTreeSet::from([3, 4]));
    }

    #[test]
    fn expansion_from_013() {
        let g = hub5();
        let current = VertexSubset::from([0, 1, 3]);
        assert_eq!(tie_lookahead(&g, &current).unwrap(), vec![(2, None)]);
        for seed in 0..10 {
            assert_eq!(next_vertex(&g, &current, &mut rng(seed)).unwrap(), 2);
        }
        assert_eq!(expand_edges(&g, &current, 2).unwrap(), vec![(0, 2)]);
    }

    #[test]
    fn edgeless_candidates_are_uniform() {
        let g = Graph::empty(6);
        let current = VertexSubset::from([0]);
        let scored = tie_lookahead(&g, &current).unwrap();
        assert!(scored.iter().all(|(_, s)| *s == Some(0)));
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..100 {
            seen.insert(next_vertex(&g, &current, &mut rng(seed)).unwrap());
        }
        assert_eq!(seen.len(), 5);
        assert!(next_vertex(&g, &VertexSubset::full(6), &mut rng(0)).is_err());
    }

    #[test]
    fn lookahead_terminal_case_scores_zero() {
        let g = Graph::complete(3);
        let scored = tie_lookahead(&g, &VertexSubset::from([0])).unwrap();
        assert_eq!(scored, vec![(1, Some(2)), (2, Some(2))]);
        let scored = tie_lookahead(&Graph::empty(2), &VertexSubset::from([0])).unwrap();
        assert_eq!(scored, vec![(1, None)]);
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let scored = tie_lookahead(&g, &VertexSubset::from([0])).unwrap();
        assert_eq!(scored, vec![(1, Some(1)), (2, Some(1))]);
    }

    #[test]
    fn initial_subgraph_examples() {
        let g = hub5();
        for seed in 0..20 {
            let s = build_initial_subgraph(&g, 1, &mut rng(seed)).unwrap();
            assert!(s == VertexSubset::from([1]) || s == VertexSubset::from([2]));
            assert_eq!(
                build_initial_subgraph(&g, 5, &mut rng(seed)).unwrap(),
                VertexSubset::full(5)
            );
        }
        assert!(build_initial_subgraph(&g, 6, &mut rng(0)).is_err());
    }

    #[test]
    fn stop_rule_truth_table() {
        assert!(check_stop(&[2.0, 2.05, 2.08], 0.1));
        assert!(!check_stop(&[1.0, 2.0, 2.05], 0.1));
        assert!(!check_stop(&[2.0, 2.0], 0.1));
        assert!(!check_stop(&[2.0], 0.1));
        assert!(!check_stop(&[2.0, 2.05, 2.3], 0.1));
        assert!(check_stop(&[0.0, 5.0, 2.0, 2.09, 2.0], 0.1));
    }

    #[test]
    fn forced_init_exit() {
        let g = hub5();
        let cfg = PqaConfig {
            delta_init: 1e9,
            p: 1,
            ..Default::default()
        };
        let rec = pqa_run(&g, &cfg, &mut rng(3)).unwrap();
        assert_eq!(rec.rounds.len(), 2);
        assert_eq!(rec.exit_flag, ExitFlag::InitExit);
        assert_eq!(rec.final_round, 0);
        assert_eq!(rec.final_bitstring, rec.rounds[0].bitstring);
        assert!(!rec.rounds[1].optimized);
        assert_eq!(rec.rounds[1].exit_flag, ExitFlag::InitExit);
    }

    #[test]
    fn forced_result_exit() {
        let g = hub5();
        let cfg = PqaConfig {
            delta_init: 1e-9,
            delta_res: 1e9,
            p: 1,
            ..Default::default()
        };
        let rec = pqa_run(&g, &cfg, &mut rng(3)).unwrap();
        assert_eq!(rec.exit_flag, ExitFlag::ResultExit);
        assert_eq!(rec.rounds.len(), 2);
        assert_eq!(rec.final_round, 0);
    }

    #[test]
    fn skip_and_continue_keeps_growing() {
        let g = hub5();
        let cfg = PqaConfig {
            delta_init: 1e9,
            skip_and_continue: true,
            p: 1,
            ..Default::default()
        };
        let rec = pqa_run(&g, &cfg, &mut rng(3)).unwrap();
        assert_eq!(rec.rounds.len(), 3);
        assert_eq!(rec.exit_flag, ExitFlag::FullGraph);
        assert_eq!(rec.final_round, 0);
    }

    #[test]
    fn k2_is_a_single_round() {
        let g = Graph::complete(2);
        let cfg = PqaConfig {
            initial_size: 2,
            ..Default::default()
        };
        let rec = pqa_run(&g, &cfg, &mut rng(0)).unwrap();
        assert_eq!(rec.rounds.len(), 1);
        assert_eq!(rec.exit_flag, ExitFlag::FullGraph);
    }

    #[test]
    fn trace_invariants_and_transfer() {
        let g = hub5();
        let beta = brute_force_mis(&g).unwrap().independence_number;
        for seed in 0..10 {
            let cfg = PqaConfig {
                initial_size: 2,
                p: 2,
                ..Default::default()
            };
            let rec = pqa_run(&g, &cfg, &mut rng(seed)).unwrap();
            let mut prev_beta = 0;
            for w in rec.rounds.windows(2) {
                assert_eq!(w[1].vertices.len(), w[0].vertices.len() + 1);
                assert!(w[0].vertices.iter().all(|v| w[1].vertices.contains(v)));
                if w[0].optimized {
                    assert_eq!(w[1].x0, w[0].params);
                }
            }
            for r in &rec.rounds {
                let sub = induced_subgraph(&g, &r.vertices).unwrap();
                let b = brute_force_mis(&sub.graph).unwrap().independence_number;
                assert!(b >= prev_beta);
                prev_beta = b;
                assert!(r.f <= b as f64 + 1e-9);
            }
            assert!(is_independent(&g, &rec.final_bitstring).unwrap());
            assert!(rec.final_f <= beta as f64 + 1e-9);
        }
    }

    #[test]
    fn jsonl_trace_has_one_line_per_round() {
        let rec = pqa_run(&hub5(), &PqaConfig::default(), &mut rng(1)).unwrap();
        let mut out = Vec::new();
        rec.write_jsonl(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), rec.rounds.len());
        let first: RoundRecord = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first, rec.rounds[0]);
    }

    #[test]
    fn exit_flag_names_round_trip() {
        for f in ExitFlag::ALL {
            assert_eq!(ExitFlag::parse(f.as_str()), Some(f));
        }
        assert_eq!(ExitFlag::parse("bogus"), None);
    }
}
