//! Objective, suboptimality and per-run trajectories.

mod protocol;
mod timing;
mod trajectory;

use ndarray::ArrayView2;

use crate::data::Dataset;
use crate::solvers::{batch_pca, MsgState, SvdState};
use crate::spectral::{check_dim, SubspaceState, RANK_TOL};
use crate::{Error, Result};

pub use protocol::{eta_grid, prepare_experiment, run_method, tune_learning_rate, EtaChoice, Experiment, MethodRun};
pub use timing::{Clock, StepTimer};
pub use trajectory::{read_trajectories, write_trajectories, Record, Trajectory, TRAJECTORY_HEADER};

/// Captured variance `(1/n)·Σₜ ‖Uᵀxₜ‖² = trace(Uᵀ·M·U)`.
pub fn objective(u: &SubspaceState, data: &Dataset) -> Result<f64> {
    objective_rows(u, data.rows.view())
}

pub fn objective_rows(u: &SubspaceState, rows: ArrayView2<f64>) -> Result<f64> {
    check_dim(u.dim(), rows.ncols())?;
    if rows.nrows() == 0 {
        return Err(Error::invalid("objective needs at least one sample"));
    }
    let proj = rows.dot(&u.basis);
    Ok(proj.iter().map(|v| v * v).sum::<f64>() / rows.nrows() as f64)
}

/// Batch optimum on an evaluation set, the yardstick for suboptimality.
#[derive(Debug, Clone)]
pub struct ReferenceOptimum {
    pub value: f64,
    pub basis: SubspaceState,
}

impl ReferenceOptimum {
    pub fn compute(eval: &Dataset, k: usize) -> Result<Self> {
        let basis = batch_pca(eval.rows.view(), k)?;
        let value = objective(&basis, eval)?;
        Ok(ReferenceOptimum { value, basis })
    }
}

/// `ref.value − objective(U, data)`.
pub fn suboptimality(u: &SubspaceState, reference: &ReferenceOptimum, data: &Dataset) -> Result<f64> {
    check_dim(reference.basis.dim(), data.dim())?;
    Ok(reference.value - objective(u, data)?)
}

/// Number of retained eigen- or singular values of a solver state.
pub trait IterateRank {
    fn iterate_rank(&self) -> usize;
}

impl IterateRank for MsgState {
    fn iterate_rank(&self) -> usize {
        self.iterate.effective_rank(RANK_TOL)
    }
}

impl IterateRank for SvdState {
    fn iterate_rank(&self) -> usize {
        self.singvals.iter().filter(|&&s| s > RANK_TOL).count()
    }
}

impl IterateRank for SubspaceState {
    fn iterate_rank(&self) -> usize {
        self.k()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub objective: f64,
    pub suboptimality: f64,
}

/// Metric callback invoked on the current solution at each probe.
pub trait Probe {
    fn measure(&mut self, solution: &SubspaceState) -> Result<Measurement>;
}

impl<F> Probe for F
where
    F: FnMut(&SubspaceState) -> Result<Measurement>,
{
    fn measure(&mut self, solution: &SubspaceState) -> Result<Measurement> {
        self(solution)
    }
}

/// Probe that scores solutions on a fixed evaluation set.
pub struct Evaluator<'a> {
    pub data: &'a Dataset,
    pub reference: &'a ReferenceOptimum,
}

impl Probe for Evaluator<'_> {
    fn measure(&mut self, solution: &SubspaceState) -> Result<Measurement> {
        let objective = objective(solution, self.data)?;
        Ok(Measurement {
            objective,
            suboptimality: self.reference.value - objective,
        })
    }
}
