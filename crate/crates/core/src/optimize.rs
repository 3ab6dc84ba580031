//! Derivative-free parameter optimization (Nelder–Mead) and the single
//! optimization run shared by every quantum algorithm.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{account_circuit, AnsatzParams, CircuitAccounting, Encoding, QaoaPlusAnsatz};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSubset};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Convergence tolerance on the objective spread across the simplex.
    pub epsilon: f64,
    /// Cap on simplex updates per run.
    pub max_iterations: usize,
    /// Offset of each initial simplex vertex from `x0`, in radians.
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            max_iterations: 500,
            initial_step: 0.1,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::Config("initial_step must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of [`maximize`].
#[derive(Clone, Debug, PartialEq)]
pub struct Maximum {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    /// Simplex updates performed.
    pub iterations: usize,
    /// Objective evaluations, including the initial simplex.
    pub evaluations: usize,
    pub converged: bool,
    /// Best value after the initial simplex and after every update.
    pub best_history: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    /// Returns the value to minimize, i.e. the negated objective.
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Error::Numeric(format!("objective returned {v} at {x:?}")));
        }
        Ok(-v)
    }
}

fn lerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

/// Maximizes `objective` from `x0` with the Nelder–Mead simplex method.
///
/// Stops once the objective values at the simplex vertices agree to within
/// `epsilon`, or after `max_iterations` simplex updates.
pub fn maximize<F>(objective: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Maximum>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    if x0.is_empty() {
        return Err(Error::Argument("empty starting point".into()));
    }
    let dim = x0.len();
    let mut obj = Counted { f: objective, evaluations: 0 };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), obj.eval(x0)?));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += cfg.initial_step;
        let v = obj.eval(&x)?;
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut best_history = Vec::new();
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        best_history.push(-simplex[0].1);
        if simplex[dim].1 - simplex[0].1 <= cfg.epsilon {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iterations {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let (worst, f_worst) = simplex[dim].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[dim - 1].1;

        let reflected = lerp(&centroid, &worst, -REFLECT);
        let f_reflected = obj.eval(&reflected)?;

        let accepted = if f_reflected < f_best {
            let expanded = lerp(&centroid, &worst, -EXPAND);
            let f_expanded = obj.eval(&expanded)?;
            Some(if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            })
        } else if f_reflected < f_second {
            Some((reflected, f_reflected))
        } else if f_reflected < f_worst {
            let outside = lerp(&centroid, &reflected, CONTRACT);
            let f_outside = obj.eval(&outside)?;
            (f_outside <= f_reflected).then_some((outside, f_outside))
        } else {
            let inside = lerp(&centroid, &worst, CONTRACT);
            let f_inside = obj.eval(&inside)?;
            (f_inside < f_worst).then_some((inside, f_inside))
        };

        match accepted {
            Some(vertex) => simplex[dim] = vertex,
            None => {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &vertex.0, SHRINK);
                    let v = obj.eval(&x)?;
                    *vertex = (x, v);
                }
            }
        }
    }

    let (best_x, best) = simplex.swap_remove(0);
    Ok(Maximum {
        best_x,
        best_value: -best,
        iterations,
        evaluations: obj.evaluations,
        converged,
        best_history,
    })
}

/// Starting point of an optimization run.
#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    /// One uniform draw per angle over its full period.
    Random,
    Params(AnsatzParams),
}

/// One optimization run of the constrained ansatz on one graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub initial_params: AnsatzParams,
    pub best_params: AnsatzParams,
    pub best_f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Most probable basis state at `best_params`; independent by
    /// construction of the ansatz.
    pub best_bitstring: VertexSubset,
    pub accounting: CircuitAccounting,
}

/// Optimizes an already-compiled ansatz from `x0`.
pub fn optimize_ansatz(
    g: &Graph,
    ansatz: &QaoaPlusAnsatz,
    x0: AnsatzParams,
    cfg: &OptimizerConfig,
) -> Result<RunResult> {
    let p = x0.p();
    let found = maximize(
        |x| {
            let params = AnsatzParams::from_flat(x).expect("flat length preserved");
            ansatz.expectation(&params)
        },
        &x0.to_flat(),
        cfg,
    )?;
    let best_params = AnsatzParams::from_flat(&found.best_x)?;
    let state = ansatz.state(&best_params);
    Ok(RunResult {
        initial_params: x0,
        best_f: found.best_value,
        best_params,
        iterations: found.iterations,
        evaluations: found.evaluations,
        best_bitstring: VertexSubset::from_mask(state.argmax_index() as u64),
        accounting: account_circuit(g, p, Encoding::QaoaPlus),
    })
}

pub fn single_run<R: Rng + ?Sized>(
    g: &Graph,
    p: usize,
    init: Init,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<RunResult> {
    let x0 = match init {
        Init::Random => AnsatzParams::random(p, rng)?,
        Init::Params(params) => {
            if params.p() != p {
                return Err(Error::Argument(format!(
                    "initial parameters have depth {}, expected {p}",
                    params.p()
                )));
            }
            params
        }
    };
    let ansatz = QaoaPlusAnsatz::new(g)?;
    optimize_ansatz(g, &ansatz, x0, cfg)
}
