use ndarray::{Array2, ArrayView1, Axis};

use super::{
    capped_msg_step, incremental_svd_step, msg_step, power_method_step, random_subspace, Method, MsgState,
    SolverConfig, SvdState,
};
use crate::bench::{IterateRank, Probe, Record, StepTimer, Trajectory};
use crate::spectral::{full_symmetric_eig, truncate_top_k, SubspaceState};
use crate::{Error, Result};

/// Probe cadence giving about 500 records over `max_iters` steps.
pub fn default_cadence(max_iters: usize) -> usize {
    max_iters.div_ceil(500).max(1)
}

enum State {
    /// Unnormalized second moment `Σ xxᵀ` and its sample count.
    Batch(Array2<f64>, usize),
    Incremental(SvdState),
    Power(SubspaceState),
    Msg(MsgState),
}

/// One solver instance behind a uniform step/solution interface.
pub struct Runner {
    method: Method,
    config: SolverConfig,
    state: Option<State>,
    steps: usize,
}

impl Runner {
    pub fn new(method: Method, dim: usize, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        if config.k > dim {
            return Err(Error::invalid(format!("k = {} exceeds dimension {dim}", config.k)));
        }
        let state = match method {
            Method::Batch => State::Batch(Array2::zeros((dim, dim)), 0),
            Method::Incremental => State::Incremental(SvdState::empty(dim)),
            Method::Power => State::Power(random_subspace(dim, config.k, config.seed)?),
            Method::Msg | Method::CappedMsg => State::Msg(MsgState::new(
                dim,
                config.k,
                config.msg_init_for(method, dim),
                config.track_average,
            )?),
        };
        Ok(Runner {
            method,
            config: config.clone(),
            state: Some(state),
            steps: 0,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Absorbs one sample with step size `ηₜ`, `t` counting from 1.
    pub fn step(&mut self, x: ArrayView1<f64>) -> Result<()> {
        let t = self.steps + 1;
        let eta = self.config.learning_rate.at(t);
        let k = self.config.k;
        let state = self
            .state
            .take()
            .ok_or_else(|| Error::invalid("solver state was lost to an earlier error"))?;
        let next = match state {
            State::Batch(mut acc, n) => {
                crate::spectral::check_dim(acc.nrows(), x.len())?;
                let xc = x.insert_axis(Axis(1));
                ndarray::linalg::general_mat_mul(1.0, &xc, &xc.t(), 1.0, &mut acc);
                State::Batch(acc, n + 1)
            }
            State::Incremental(s) => State::Incremental(incremental_svd_step(s, x, k)?),
            State::Power(s) => State::Power(power_method_step(s, x, eta)?),
            State::Msg(s) => State::Msg(match self.method {
                Method::CappedMsg => capped_msg_step(s, x, eta, k, self.config.cap())?,
                _ => msg_step(s, x, eta, k)?,
            }),
        };
        self.state = Some(next);
        self.steps = t;
        Ok(())
    }

    /// Current rank-`k` answer.
    pub fn solution(&self) -> Result<SubspaceState> {
        let k = self.config.k;
        match self.state()? {
            State::Batch(acc, n) => {
                if *n == 0 {
                    return Err(Error::EmptyStream);
                }
                let eig = full_symmetric_eig(&(acc / *n as f64))?;
                Ok(truncate_top_k(&eig, k)?.subspace)
            }
            State::Incremental(s) => {
                let eig = crate::spectral::EigState {
                    basis: s.basis.clone(),
                    eigvals: s.singvals.clone(),
                };
                Ok(truncate_top_k(&eig, k)?.subspace)
            }
            State::Power(s) => Ok(s.clone()),
            State::Msg(s) => s.solution(k),
        }
    }

    pub fn msg_state(&self) -> Option<&MsgState> {
        match self.state.as_ref()? {
            State::Msg(s) => Some(s),
            _ => None,
        }
    }

    pub fn power_state(&self) -> Option<&SubspaceState> {
        match self.state.as_ref()? {
            State::Power(s) => Some(s),
            _ => None,
        }
    }

    pub fn svd_state(&self) -> Option<&SvdState> {
        match self.state.as_ref()? {
            State::Incremental(s) => Some(s),
            _ => None,
        }
    }

    fn state(&self) -> Result<&State> {
        self.state
            .as_ref()
            .ok_or_else(|| Error::invalid("solver state was lost to an earlier error"))
    }
}

impl IterateRank for Runner {
    fn iterate_rank(&self) -> usize {
        match self.state.as_ref() {
            Some(State::Batch(acc, _)) => acc.nrows(),
            Some(State::Incremental(s)) => s.iterate_rank(),
            Some(State::Power(s)) => s.iterate_rank(),
            Some(State::Msg(s)) => s.iterate_rank(),
            None => 0,
        }
    }
}

/// Runs `method` over at most `config.max_iters` samples without probing and
/// returns the final rank-`k` solution.
pub fn fit<'a, I>(method: Method, stream: I, config: &SolverConfig) -> Result<SubspaceState>
where
    I: IntoIterator<Item = ArrayView1<'a, f64>>,
{
    let mut iter = stream.into_iter().take(config.max_iters).peekable();
    let dim = iter.peek().ok_or(Error::EmptyStream)?.len();
    let mut runner = Runner::new(method, dim, config)?;
    for x in iter {
        runner.step(x)?;
    }
    runner.solution()
}

/// Drives `method` over the stream, probing the solution every
/// `config.cadence()` steps and after the last one.
///
/// Stochastic methods also record the initial state at iteration 0, so `T`
/// steps at cadence `c` produce `⌈T/c⌉ + 1` records. The batch method records
/// once, after its eigendecomposition. Elapsed time covers solver work only.
pub fn run_solver<'a, I, P>(
    method: Method,
    stream: I,
    config: &SolverConfig,
    probe: &mut P,
) -> Result<(SubspaceState, Trajectory)>
where
    I: IntoIterator<Item = ArrayView1<'a, f64>>,
    P: Probe + ?Sized,
{
    let mut iter = stream.into_iter().take(config.max_iters).peekable();
    let dim = iter.peek().ok_or(Error::EmptyStream)?.len();
    let mut runner = Runner::new(method, dim, config)?;
    let mut timer = StepTimer::new(config.clock);
    let mut trajectory = Trajectory::default();
    let cadence = config.cadence();
    let probing = method != Method::Batch;

    let mut record = |runner: &Runner, solution: &SubspaceState, timer: &StepTimer| -> Result<()> {
        let m = probe.measure(solution)?;
        trajectory.records.push(Record {
            iteration: runner.steps(),
            elapsed: timer.elapsed_secs(),
            objective: m.objective,
            suboptimality: m.suboptimality,
            rank: runner.iterate_rank(),
        });
        Ok(())
    };

    let mut last = None;
    if probing {
        let solution = runner.solution()?;
        record(&runner, &solution, &timer)?;
        last = Some(solution);
    }
    for x in iter {
        timer.time(|| runner.step(x))?;
        if probing && runner.steps() % cadence == 0 {
            let solution = runner.solution()?;
            record(&runner, &solution, &timer)?;
            last = Some(solution);
        }
    }
    let final_recorded = probing && runner.steps() % cadence == 0;
    let solution = match last {
        Some(s) if final_recorded => s,
        _ => {
            let s = if probing {
                runner.solution()?
            } else {
                timer.time(|| runner.solution())?
            };
            record(&runner, &s, &timer)?;
            s
        }
    };
    Ok((solution, trajectory))
}
