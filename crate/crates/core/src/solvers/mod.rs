//! The five PCA solvers and the loop that drives them over a sample stream.
//!
//! Each stochastic solver is a pure step function on a plain state value
//! (`incremental_svd_step`, `power_method_step`, `msg_step`,
//! `capped_msg_step`); [`Runner`] wraps them behind one step/solution
//! interface and [`run_solver`] adds probing and timing.

mod batch;
mod incremental;
mod msg;
mod power;
mod runner;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::Clock;
use crate::{Error, Result};

pub use crate::spectral::SubspaceState;
pub use batch::{batch_pca, second_moment};
pub use incremental::{incremental_svd_step, SvdState};
pub use msg::{capped_msg_step, msg_finalize, msg_step, MsgState};
pub use power::{power_method_step, random_subspace};
pub use runner::{default_cadence, fit, run_solver, Runner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Batch,
    Incremental,
    Power,
    Msg,
    CappedMsg,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Batch,
        Method::Incremental,
        Method::Power,
        Method::Msg,
        Method::CappedMsg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Batch => "batch",
            Method::Incremental => "incremental",
            Method::Power => "power",
            Method::Msg => "msg",
            Method::CappedMsg => "capped_msg",
        }
    }

    /// Whether the method consumes a step size.
    pub fn uses_learning_rate(self) -> bool {
        matches!(self, Method::Power | Method::Msg | Method::CappedMsg)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            Error::invalid(format!(
                "unknown method '{s}' (expected one of batch, incremental, power, msg, capped_msg)"
            ))
        })
    }
}

/// Step-size schedule `ηₜ`, indexed from `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "eta0", rename_all = "snake_case")]
pub enum LearningRate {
    Constant(f64),
    /// `η₀ / √t`
    InvSqrt(f64),
}

impl LearningRate {
    pub fn base(self) -> f64 {
        match self {
            LearningRate::Constant(e) | LearningRate::InvSqrt(e) => e,
        }
    }

    pub fn with_base(self, eta0: f64) -> Self {
        match self {
            LearningRate::Constant(_) => LearningRate::Constant(eta0),
            LearningRate::InvSqrt(_) => LearningRate::InvSqrt(eta0),
        }
    }

    pub fn at(self, t: usize) -> f64 {
        match self {
            LearningRate::Constant(e) => e,
            LearningRate::InvSqrt(e) => e / (t.max(1) as f64).sqrt(),
        }
    }
}

/// Starting iterate for MSG and capped MSG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsgInit {
    /// `(k/d)·I`, stored at full rank.
    ScaledIdentity,
    /// The zero matrix (rank 0); the first projection makes it feasible.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Target rank `k`.
    pub k: usize,
    /// Rank cap `K` for capped MSG; `None` means `k + 1`.
    pub cap: Option<usize>,
    pub learning_rate: LearningRate,
    /// Number of samples consumed, `T`.
    pub max_iters: usize,
    pub seed: u64,
    /// Probe every `cadence` steps; `None` means `⌈T/500⌉`.
    pub cadence: Option<usize>,
    /// `None` picks `(k/d)·I` for MSG, and for capped MSG whenever `K ≥ d`
    /// (otherwise the zero matrix, whose rank respects the cap).
    pub msg_init: Option<MsgInit>,
    /// Maintain the dense running average of MSG iterates. Without it the
    /// solution is read from the current iterate.
    pub track_average: bool,
    pub clock: Clock,
}

impl SolverConfig {
    pub fn new(k: usize, max_iters: usize) -> Self {
        SolverConfig {
            k,
            cap: None,
            learning_rate: LearningRate::InvSqrt(1.0),
            max_iters,
            seed: 42,
            cadence: None,
            msg_init: None,
            track_average: true,
            clock: Clock::Wall,
        }
    }

    pub fn cap(&self) -> usize {
        self.cap.unwrap_or(self.k + 1)
    }

    pub fn cadence(&self) -> usize {
        self.cadence.unwrap_or_else(|| default_cadence(self.max_iters))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.cap() < self.k {
            return Err(Error::invalid(format!(
                "cap K = {} is below k = {}",
                self.cap(),
                self.k
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("the iteration count must be at least 1"));
        }
        let eta0 = self.learning_rate.base();
        if !eta0.is_finite() || eta0 <= 0.0 {
            return Err(Error::invalid(format!("base step size must be positive, got {eta0}")));
        }
        if self.cadence == Some(0) {
            return Err(Error::invalid("probe cadence must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn msg_init_for(&self, method: Method, dim: usize) -> MsgInit {
        self.msg_init.unwrap_or(match method {
            Method::CappedMsg if self.cap() < dim => MsgInit::Zero,
            _ => MsgInit::ScaledIdentity,
        })
    }
}
