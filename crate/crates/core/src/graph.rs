//! Simple undirected graphs, vertex subsets, random instance generators and
//! the exhaustive maximum-independent-set oracle.
//!
//! Vertices are labeled `0..n`. Adjacency lists are kept sorted so that every
//! derived quantity (edge lists, subgraph relabelings, oracle output) is
//! deterministic.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest graph the exhaustive oracle will enumerate.
pub const MIS_ORACLE_MAX_VERTICES: usize = 24;

/// Retry cap for the pairing model in [`gen_regular`].
pub const REGULAR_RETRY_CAP: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adjacency: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) are merged; self-loops and out-of-range endpoints are
    /// rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Argument(format!(
                    "edge ({u},{v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::Argument(format!("self-loop at vertex {u}")));
            }
            sets[u].insert(v);
            sets[v].insert(u);
        }
        Ok(Self {
            n,
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn complete(n: usize) -> Self {
        let adjacency = (0..n)
            .map(|u| (0..n).filter(|&v| v != u).collect())
            .collect();
        Self { n, adjacency }
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbor list of `u`.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m());
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    /// Number of vertices with at least one neighbor.
    pub fn non_isolated_count(&self) -> usize {
        self.adjacency.iter().filter(|a| !a.is_empty()).count()
    }

    /// Neighborhood of `u` as a bitmask. Only valid for `n <= 64`.
    pub fn neighbor_mask(&self, u: usize) -> u64 {
        debug_assert!(self.n <= 64);
        self.adjacency[u].iter().fold(0u64, |m, &v| m | (1u64 << v))
    }

    pub fn neighbor_masks(&self) -> Vec<u64> {
        (0..self.n).map(|u| self.neighbor_mask(u)).collect()
    }

    /// Number of edges with both endpoints set in `mask`.
    pub fn violations(&self, mask: u64) -> usize {
        self.edges()
            .iter()
            .filter(|&&(u, v)| mask >> u & 1 == 1 && mask >> v & 1 == 1)
            .count()
    }

    fn check_subset(&self, vs: &VertexSubset) -> Result<()> {
        match vs.iter().find(|&v| v >= self.n) {
            Some(v) => Err(Error::Argument(format!(
                "vertex {v} outside graph with {} vertices",
                self.n
            ))),
            None => Ok(()),
        }
    }

    /// Renders the edge-list text format: a header `n m` followed by one
    /// sorted `u v` pair per line.
    pub fn to_edge_list(&self) -> String {
        let edges = self.edges();
        let mut s = format!("{} {}\n", self.n, edges.len());
        for (u, v) in edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing `n m` header".into(),
        })?;
        let [n, m] = parse_pair(hline, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let [u, v] = parse_pair(line, l)?;
            if u >= n || v >= n || u == v {
                return Err(Error::Parse {
                    line,
                    message: format!("invalid edge ({u},{v}) for n = {n}"),
                });
            }
            edges.push((u, v));
        }
        let g = Self::from_edges(n, &edges)?;
        if edges.len() != m || g.m() != m {
            return Err(Error::Parse {
                line: hline,
                message: format!("header declares {m} edges, found {} distinct", g.m()),
            });
        }
        Ok(g)
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_edge_list().as_bytes())?;
        Ok(())
    }
}

fn parse_pair(line: usize, text: &str) -> Result<[usize; 2]> {
    let mut it = text.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok([a, b]),
        _ => Err(Error::Parse {
            line,
            message: format!("expected two non-negative integers, got `{text}`"),
        }),
    }
}

/// A set of vertex labels. Its bitstring view has `x_u = 1` exactly when
/// `u` is a member.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSubset(BTreeSet<usize>);

impl VertexSubset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn full(n: usize) -> Self {
        (0..n).collect()
    }

    /// Members are the set bits of `mask`.
    pub fn from_mask(mask: u64) -> Self {
        (0..64).filter(|&b| mask >> b & 1 == 1).collect()
    }

    /// Bitmask view. Panics if a member is `>= 64`.
    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &v| {
            assert!(v < 64, "vertex {v} does not fit a 64-bit mask");
            m | (1u64 << v)
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: usize) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: usize) -> bool {
        self.0.remove(&v)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Bitstring `x_0 x_1 ... x_{n-1}`.
    pub fn bitstring(&self, n: usize) -> String {
        (0..n)
            .map(|v| if self.contains(v) { '1' } else { '0' })
            .collect()
    }
}

impl FromIterator<usize> for VertexSubset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[usize; N]> for VertexSubset {
    fn from(a: [usize; N]) -> Self {
        a.into_iter().collect()
    }
}

/// An induced subgraph together with the dense relabeling back to the
/// parent graph: vertex `i` of `graph` is vertex `labels[i]` of the parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedSubgraph {
    pub graph: Graph,
    pub labels: Vec<usize>,
}

impl InducedSubgraph {
    pub fn to_parent(&self, local: &VertexSubset) -> VertexSubset {
        local.iter().map(|v| self.labels[v]).collect()
    }

    /// Local label of parent vertex `v`, if it is part of the subgraph.
    pub fn to_local(&self, v: usize) -> Option<usize> {
        self.labels.binary_search(&v).ok()
    }

    /// Restricts a parent-labeled subset to the subgraph, in local labels.
    pub fn localize(&self, parent: &VertexSubset) -> VertexSubset {
        parent.iter().filter_map(|v| self.to_local(v)).collect()
    }
}

/// Exact maximum-independent-set information for a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MisOracleResult {
    pub independence_number: usize,
    /// Every maximum independent set, ordered by increasing bitstring value.
    pub all_mis_sets: Vec<VertexSubset>,
}

/// Erdős–Rényi `G(n, p)`: every pair `u < v` is visited in lexicographic
/// order and kept with probability `edge_prob`.
pub fn gen_er<R: Rng + ?Sized>(n: usize, edge_prob: f64, rng: &mut R) -> Result<Graph> {
    if n == 0 {
        return Err(Error::Config("ER graph needs at least one vertex".into()));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Config(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Random `d`-regular graph by the pairing (configuration) model, rejecting
/// outcomes with self-loops or parallel edges.
pub fn gen_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
    if d >= n {
        return Err(Error::Config(format!("degree {d} must be below n = {n}")));
    }
    if n * d % 2 == 1 {
        return Err(Error::Config(format!("n * d = {} is odd", n * d)));
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    'attempt: for _ in 0..REGULAR_RETRY_CAP {
        stubs.shuffle(rng);
        let mut seen = BTreeSet::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
        }
        let edges: Vec<_> = seen.into_iter().collect();
        return Graph::from_edges(n, &edges);
    }
    Err(Error::GenerationFailure {
        attempts: REGULAR_RETRY_CAP,
        reason: format!("no simple {d}-regular pairing found on {n} vertices"),
    })
}

/// Subgraph induced by `vs`, relabeled densely in ascending order of the
/// original labels.
pub fn induced_subgraph(g: &Graph, vs: &VertexSubset) -> Result<InducedSubgraph> {
    g.check_subset(vs)?;
    let labels = vs.to_vec();
    let adjacency = labels
        .iter()
        .map(|&u| {
            g.neighbors(u)
                .iter()
                .filter_map(|&v| labels.binary_search(&v).ok())
                .collect()
        })
        .collect();
    Ok(InducedSubgraph {
        graph: Graph {
            n: labels.len(),
            adjacency,
        },
        labels,
    })
}

pub fn is_independent(g: &Graph, vs: &VertexSubset) -> Result<bool> {
    g.check_subset(vs)?;
    Ok(vs
        .iter()
        .all(|u| g.neighbors(u).iter().all(|&v| !vs.contains(v))))
}

/// Whether the set bits of `mask` form an independent set (`n <= 64`).
pub fn is_independent_mask(masks: &[u64], mask: u64) -> bool {
    let mut rest = mask;
    while rest != 0 {
        let u = rest.trailing_zeros() as usize;
        if masks[u] & mask != 0 {
            return false;
        }
        rest &= rest - 1;
    }
    true
}

/// Exhaustive scan of all `2^n` subsets in increasing bitstring value.
pub fn brute_force_mis(g: &Graph) -> Result<MisOracleResult> {
    let n = g.n();
    if n > MIS_ORACLE_MAX_VERTICES {
        return Err(Error::Capacity {
            what: "oracle vertices",
            got: n,
            limit: MIS_ORACLE_MAX_VERTICES,
        });
    }
    let masks = g.neighbor_masks();
    let total = 1usize << n;
    // independent[s] = independent[s without lowest bit] && lowest bit has no neighbor in s
    let mut independent = vec![false; total];
    independent[0] = true;
    let mut best = 0usize;
    let mut sets = vec![0u64];
    for s in 1..total {
        let low = s.trailing_zeros() as usize;
        let ok = independent[s & (s - 1)] && masks[low] & s as u64 == 0;
        independent[s] = ok;
        if ok {
            let size = s.count_ones() as usize;
            if size > best {
                best = size;
                sets.clear();
            }
            if size == best {
                sets.push(s as u64);
            }
        }
    }
    Ok(MisOracleResult {
        independence_number: best,
        all_mis_sets: sets.into_iter().map(VertexSubset::from_mask).collect(),
    })
}

/// Minimum-degree vertex; ties are broken uniformly at random.
pub fn min_degree_vertex<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Result<usize> {
    let min = (0..g.n())
        .map(|u| g.degree(u))
        .min()
        .ok_or_else(|| Error::Argument("graph has no vertices".into()))?;
    let ties: Vec<usize> = (0..g.n()).filter(|&u| g.degree(u) == min).collect();
    Ok(*ties.choose(rng).expect("tie set is nonempty"))
}

/// Number of edges between `candidate` and members of `current`.
pub fn closeness(g: &Graph, current: &VertexSubset, candidate: usize) -> Result<usize> {
    if candidate >= g.n() {
        return Err(Error::Argument(format!("candidate {candidate} out of range")));
    }
    if current.contains(candidate) {
        return Err(Error::Argument(format!(
            "candidate {candidate} already in the current subgraph"
        )));
    }
    Ok(g.neighbors(candidate)
        .iter()
        .filter(|&&v| current.contains(v))
        .count())
}

/// BFS distances from `root`; unreachable vertices are `None`.
pub fn bfs_distances(g: &Graph, root: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::from([root]);
    dist[root] = Some(0);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued vertices have a distance");
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Per-vertex eccentricity, measured within each vertex's own component.
pub fn eccentricities(g: &Graph) -> Vec<usize> {
    (0..g.n())
        .map(|v| bfs_distances(g, v).into_iter().flatten().max().unwrap_or(0))
        .collect()
}
