//! The experiment protocol shared by the CLI and the acceptance suite:
//! split three ways, standardize with statistics fitted on the training
//! part, tune the base step size on the tuning part, then run on the
//! training stream while scoring against the batch optimum of the test part.

use serde::Serialize;

use super::{objective, Evaluator, ReferenceOptimum, Trajectory};
use crate::data::{split, Dataset, Normalization};
use crate::solvers::{fit, run_solver, Method, SolverConfig};
use crate::spectral::SubspaceState;
use crate::{Error, Result};

pub struct Experiment {
    pub train: Dataset,
    pub tune: Dataset,
    pub test: Dataset,
    pub normalization: Normalization,
    /// Batch optimum of the test split.
    pub reference: ReferenceOptimum,
}

pub fn prepare_experiment(data: &Dataset, fractions: [f64; 3], k: usize, seed: u64) -> Result<Experiment> {
    let parts = split(data, fractions, seed)?;
    let normalization = Normalization::fit(&parts.train)?;
    let train = normalization.apply(&parts.train)?;
    let tune = normalization.apply(&parts.tune)?;
    let test = normalization.apply(&parts.test)?;
    let reference = ReferenceOptimum::compute(&test, k)?;
    Ok(Experiment {
        train,
        tune,
        test,
        normalization,
        reference,
    })
}

/// `{2⁻⁶, 2⁻⁵, …, 2²}`.
pub fn eta_grid() -> Vec<f64> {
    (-6..=2).map(|e| 2f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum EtaChoice {
    Fixed(f64),
    Grid(Vec<f64>),
}

/// Fits `method` on the training stream once per candidate base step size
/// and keeps the one with the largest objective on the tuning split
/// (smallest candidate on ties). Candidates whose run fails score `NaN`.
pub fn tune_learning_rate(
    method: Method,
    exp: &Experiment,
    config: &SolverConfig,
    grid: &[f64],
) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut scores = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &eta0 in grid {
        let cfg = SolverConfig {
            learning_rate: config.learning_rate.with_base(eta0),
            ..config.clone()
        };
        let score = fit(method, exp.train.stream(), &cfg)
            .and_then(|u| objective(&u, &exp.tune))
            .unwrap_or(f64::NAN);
        scores.push((eta0, score));
        if score.is_finite() && best.is_none_or(|(_, s)| score > s) {
            best = Some((eta0, score));
        }
    }
    let (eta0, _) = best.ok_or_else(|| Error::invalid(format!("no step size in the grid worked for {method}")))?;
    Ok((eta0, scores))
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodRun {
    pub method: Method,
    /// Base step size used; `None` for methods without one.
    pub eta0: Option<f64>,
    /// `(η₀, tuning objective)` for every grid candidate tried.
    pub tuning: Vec<(f64, f64)>,
    #[serde(skip)]
    pub solution: Option<SubspaceState>,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

/// Tunes (if asked) and runs one method on the experiment's training stream,
/// probing against the test split.
pub fn run_method(method: Method, exp: &Experiment, config: &SolverConfig, eta: &EtaChoice) -> Result<MethodRun> {
    let (eta0, tuning) = match (method.uses_learning_rate(), eta) {
        (false, _) => (None, Vec::new()),
        (true, EtaChoice::Fixed(e)) => (Some(*e), Vec::new()),
        (true, EtaChoice::Grid(grid)) => {
            let (e, scores) = tune_learning_rate(method, exp, config, grid)?;
            (Some(e), scores)
        }
    };
    let cfg = match eta0 {
        Some(e) => SolverConfig {
            learning_rate: config.learning_rate.with_base(e),
            ..config.clone()
        },
        None => config.clone(),
    };
    let mut evaluator = Evaluator {
        data: &exp.test,
        reference: &exp.reference,
    };
    let (solution, trajectory) = run_solver(method, exp.train.stream(), &cfg, &mut evaluator)?;
    Ok(MethodRun {
        method,
        eta0,
        tuning,
        solution: Some(solution),
        trajectory,
    })
}
