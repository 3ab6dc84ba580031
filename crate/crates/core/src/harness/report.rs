use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::run::RunRow;
use super::{Algorithm, GraphType};
use crate::error::{Error, Result};
use crate::metrics::{estimate_runs_to_target, oar_aar, shallowest_depth_achieving, total_resources, ResourceLedger};

/// Reads a results table, validating every row.
pub fn read_results<R: Read>(r: R) -> Result<Vec<RunRow>> {
    let mut reader = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<RunRow>().enumerate() {
        // header is line 1
        let line = i + 2;
        let row = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(line, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        row.validate().map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

type GraphKey = (GraphType, String, Algorithm);

fn by_graph_and_depth(rows: &[RunRow]) -> BTreeMap<GraphKey, BTreeMap<usize, Vec<&RunRow>>> {
    let mut groups: BTreeMap<GraphKey, BTreeMap<usize, Vec<&RunRow>>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.graph_type, row.graph_id.clone(), row.algorithm))
            .or_default()
            .entry(row.p)
            .or_default()
            .push(row);
    }
    groups
}

fn ratios(rows: &[&RunRow]) -> Vec<f64> {
    rows.iter().filter_map(|r| r.ar).collect()
}

/// Resource totals of one algorithm on one graph for one target.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphTotal {
    pub graph_type: GraphType,
    pub graph_id: String,
    pub algorithm: Algorithm,
    pub target: f64,
    pub chosen_depth: Option<usize>,
    pub expected_runs: Option<f64>,
    pub totals: Option<ResourceLedger>,
}

pub fn graph_totals(rows: &[RunRow], targets: &[f64]) -> Vec<GraphTotal> {
    let mut out = Vec::new();
    for ((graph_type, graph_id, algorithm), depths) in by_graph_and_depth(rows) {
        let oar: BTreeMap<usize, f64> = depths
            .iter()
            .filter_map(|(&p, rs)| oar_aar(&ratios(rs)).ok().map(|(o, _)| (p, o)))
            .collect();
        for &target in targets {
            let mut total = GraphTotal {
                graph_type,
                graph_id: graph_id.clone(),
                algorithm,
                target,
                chosen_depth: None,
                expected_runs: None,
                totals: None,
            };
            if let Some(p) = shallowest_depth_achieving(&oar, target) {
                let rs = &depths[&p];
                let successes = ratios(rs).into_iter().filter(|&ar| ar >= target).count();
                let ledgers: Vec<ResourceLedger> = rs.iter().filter(|r| !r.failed()).map(|r| r.ledger()).collect();
                total.chosen_depth = Some(p);
                total.expected_runs = estimate_runs_to_target(successes, rs.len());
                total.totals = total
                    .expected_runs
                    .and_then(|e| total_resources(&ledgers, e).ok());
            }
            out.push(total);
        }
    }
    out
}

/// One line of the aggregate table: means over the graphs of a type that
/// reach the target. Empty fields mean no graph reached it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub graph_type: GraphType,
    pub algorithm: Algorithm,
    #[serde(rename = "target_AR")]
    pub target: f64,
    pub chosen_depth: Option<f64>,
    pub expected_runs: Option<f64>,
    pub total_iterations: Option<f64>,
    pub total_qubits: Option<f64>,
    pub total_gates: Option<f64>,
    #[serde(rename = "total_runtime_s")]
    pub total_runtime: Option<f64>,
    pub graphs_reached: usize,
    pub graphs_total: usize,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn aggregate(rows: &[RunRow], targets: &[f64]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(GraphType, Algorithm, usize), Vec<GraphTotal>> = BTreeMap::new();
    for t in graph_totals(rows, targets) {
        let ti = targets.iter().position(|&x| x == t.target).unwrap_or(0);
        groups.entry((t.graph_type, t.algorithm, ti)).or_default().push(t);
    }
    groups
        .into_iter()
        .map(|((graph_type, algorithm, ti), totals)| {
            let reached: Vec<(&GraphTotal, &ResourceLedger)> =
                totals.iter().filter_map(|t| t.totals.as_ref().map(|l| (t, l))).collect();
            let field = |f: fn(&GraphTotal, &ResourceLedger) -> f64| {
                mean(&reached.iter().map(|(t, l)| f(t, l)).collect::<Vec<_>>())
            };
            AggregateRow {
                graph_type,
                algorithm,
                target: targets[ti],
                chosen_depth: field(|t, _| t.chosen_depth.unwrap_or(0) as f64),
                expected_runs: field(|t, _| t.expected_runs.unwrap_or(0.0)),
                total_iterations: field(|_, l| l.iterations),
                total_qubits: field(|_, l| l.qubits),
                total_gates: field(|_, l| l.multi_ctrl_rx_gates),
                total_runtime: field(|_, l| l.modeled_runtime),
                graphs_reached: reached.len(),
                graphs_total: totals.len(),
            }
        })
        .collect()
}

pub fn write_aggregate<W: Write>(rows: &[AggregateRow], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Mean over graphs of the per-graph optimal and average ratios at one
/// depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthSummary {
    pub graph_type: GraphType,
    pub algorithm: Algorithm,
    pub p: usize,
    pub graphs: usize,
    #[serde(rename = "OAR")]
    pub oar: f64,
    #[serde(rename = "AAR")]
    pub aar: f64,
}

pub fn ar_summary(rows: &[RunRow]) -> Vec<DepthSummary> {
    let mut groups: BTreeMap<(GraphType, Algorithm, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for ((graph_type, _, algorithm), depths) in by_graph_and_depth(rows) {
        for (p, rs) in depths {
            if let Ok(pair) = oar_aar(&ratios(&rs)) {
                groups.entry((graph_type, algorithm, p)).or_default().push(pair);
            }
        }
    }
    groups
        .into_iter()
        .map(|((graph_type, algorithm, p), pairs)| DepthSummary {
            graph_type,
            algorithm,
            p,
            graphs: pairs.len(),
            oar: pairs.iter().map(|x| x.0).sum::<f64>() / pairs.len() as f64,
            aar: pairs.iter().map(|x| x.1).sum::<f64>() / pairs.len() as f64,
        })
        .collect()
}

pub fn write_ar_summary<W: Write>(rows: &[DepthSummary], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
