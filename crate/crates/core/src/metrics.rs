//! Approximation-ratio statistics, resource totals and the hardware runtime
//! model.
//!
//! Runtime model, per circuit execution:
//!
//! ```text
//! t_q    = (t_p + t_M) + depth * t_G     one shot
//! T_ITR  = t_q * M                       one iteration (M shots)
//! T_q    = T_ITR * ITRs                  one optimization loop
//! T_c    = J * t_j                       classical adjacency queries
//! ```
//!
//! A run's time is the sum of `T_q` over its circuits plus `T_c`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::CircuitAccounting;
use crate::baselines::hill_climb;
use crate::error::{Error, Result};
use crate::graph::{brute_force_mis, Graph, MIS_ORACLE_MAX_VERTICES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuntimeModelConfig {
    /// State preparation plus one measurement, seconds.
    pub t_prep_plus_meas: f64,
    /// One gate layer, seconds.
    pub t_gate: f64,
    /// One classical adjacency query, seconds.
    pub t_edge_check: f64,
    /// Shots per expectation estimate.
    pub shots: usize,
}

impl Default for RuntimeModelConfig {
    fn default() -> Self {
        Self {
            t_prep_plus_meas: 1e-3,
            t_gate: 1e-8,
            t_edge_check: 0.31226e-3,
            shots: 1000,
        }
    }
}

impl RuntimeModelConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.t_prep_plus_meas > 0.0
            && self.t_gate > 0.0
            && self.t_edge_check > 0.0
            && self.shots > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config("runtime model parameters must be positive".into()))
        }
    }

    pub fn repetition_time(&self, depth: usize) -> f64 {
        self.t_prep_plus_meas + depth as f64 * self.t_gate
    }

    pub fn iteration_time(&self, depth: usize) -> f64 {
        self.repetition_time(depth) * self.shots as f64
    }

    pub fn quantum_time(&self, depth: usize, iterations: usize) -> f64 {
        self.iteration_time(depth) * iterations as f64
    }

    pub fn classical_time(&self, edge_checks: usize) -> f64 {
        edge_checks as f64 * self.t_edge_check
    }
}

/// Wall-clock estimate of one run: `(circuit depth, iterations)` per
/// circuit, plus `edge_checks` classical queries.
pub fn modeled_runtime(circuits: &[(usize, usize)], edge_checks: usize, rt: &RuntimeModelConfig) -> f64 {
    circuits
        .iter()
        .map(|&(depth, itrs)| rt.quantum_time(depth, itrs))
        .sum::<f64>()
        + rt.classical_time(edge_checks)
}

/// Resource consumption. Per-run ledgers hold integral counts; totals are
/// expected-run-weighted means and therefore real-valued.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceLedger {
    pub runs: f64,
    pub iterations: f64,
    pub evaluations: f64,
    /// The algorithm's qubit figure: peak for progressive runs, sum over
    /// local solves for local search, `n + 1` for the direct solve.
    pub qubits: f64,
    pub qubits_peak: f64,
    pub qubits_sum: f64,
    pub multi_ctrl_rx_gates: f64,
    pub edge_checks: f64,
    pub modeled_runtime: f64,
}

impl ResourceLedger {
    pub fn single_run() -> Self {
        Self {
            runs: 1.0,
            ..Default::default()
        }
    }

    /// Charges one optimized circuit. Updates the peak and the sum of qubits
    /// and sets `qubits` to the peak; callers with a different rule
    /// overwrite it.
    pub fn add_circuit(
        &mut self,
        acc: &CircuitAccounting,
        iterations: usize,
        evaluations: usize,
        rt: &RuntimeModelConfig,
    ) {
        let q = acc.qubits_total() as f64;
        self.iterations += iterations as f64;
        self.evaluations += evaluations as f64;
        self.qubits_peak = self.qubits_peak.max(q);
        self.qubits_sum += q;
        self.qubits = self.qubits_peak;
        self.multi_ctrl_rx_gates += acc.multi_ctrl_rx_gates as f64;
        self.modeled_runtime += rt.quantum_time(acc.circuit_depth, iterations);
    }

    pub fn add_edge_checks(&mut self, checks: usize, rt: &RuntimeModelConfig) {
        self.edge_checks += checks as f64;
        self.modeled_runtime += rt.classical_time(checks);
    }

    fn fields_mut(&mut self) -> [&mut f64; 9] {
        [
            &mut self.runs,
            &mut self.iterations,
            &mut self.evaluations,
            &mut self.qubits,
            &mut self.qubits_peak,
            &mut self.qubits_sum,
            &mut self.multi_ctrl_rx_gates,
            &mut self.edge_checks,
            &mut self.modeled_runtime,
        ]
    }

    fn fields(&self) -> [f64; 9] {
        [
            self.runs,
            self.iterations,
            self.evaluations,
            self.qubits,
            self.qubits_peak,
            self.qubits_sum,
            self.multi_ctrl_rx_gates,
            self.edge_checks,
            self.modeled_runtime,
        ]
    }

    /// Field-wise sum.
    pub fn merge(&mut self, other: &ResourceLedger) {
        for (a, b) in self.fields_mut().into_iter().zip(other.fields()) {
            *a += b;
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for f in out.fields_mut() {
            *f *= factor;
        }
        out
    }
}

/// `F / F_max`.
pub fn approximation_ratio(f: f64, f_max: f64) -> Result<f64> {
    if !(f_max > 0.0) {
        return Err(Error::Argument(format!("F_max = {f_max} must be positive")));
    }
    Ok(f / f_max)
}

/// `(max, mean)` of per-run approximation ratios.
pub fn oar_aar(ratios: &[f64]) -> Result<(f64, f64)> {
    if ratios.is_empty() {
        return Err(Error::Argument("no approximation ratios given".into()));
    }
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok((max, mean))
}

/// Expected number of runs to hit the target once: `total / successes`,
/// or `None` when no run succeeded.
pub fn estimate_runs_to_target(successes: usize, total_runs: usize) -> Option<f64> {
    (successes > 0 && total_runs > 0).then(|| total_runs as f64 / successes as f64)
}

/// Smallest depth whose OAR reaches `target_ar`.
pub fn shallowest_depth_achieving(oar_by_depth: &BTreeMap<usize, f64>, target_ar: f64) -> Option<usize> {
    oar_by_depth
        .iter()
        .find(|(_, &oar)| oar >= target_ar)
        .map(|(&p, _)| p)
}

/// `expected_runs * mean(per-run ledger)`, field by field.
pub fn total_resources(per_run: &[ResourceLedger], expected_runs: f64) -> Result<ResourceLedger> {
    if per_run.is_empty() {
        return Err(Error::Argument("no per-run ledgers to total".into()));
    }
    let mut sum = ResourceLedger::default();
    for l in per_run {
        sum.merge(l);
    }
    Ok(sum.scaled(expected_runs / per_run.len() as f64))
}

/// Reference value for the approximation ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FMax {
    pub value: f64,
    /// `false` when the value is the best of repeated hill-climbing restarts.
    pub exact: bool,
}

pub const HEURISTIC_FMAX_RESTARTS: usize = 100;

/// Exact independence number when the oracle can enumerate the graph,
/// otherwise the largest set found by repeated hill climbing.
pub fn f_max<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Result<FMax> {
    if g.n() <= MIS_ORACLE_MAX_VERTICES {
        let beta = brute_force_mis(g)?.independence_number;
        return Ok(FMax {
            value: beta as f64,
            exact: true,
        });
    }
    let mut best = 0;
    for _ in 0..HEURISTIC_FMAX_RESTARTS {
        best = best.max(hill_climb(g, None, rng, usize::MAX)?.len());
    }
    Ok(FMax {
        value: best as f64,
        exact: false,
    })
}
