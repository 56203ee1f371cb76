use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::Error;

/// Source of the `elapsed_s` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clock {
    /// Monotonic wall clock.
    Wall,
    /// Always zero; makes trajectories byte-reproducible.
    Off,
}

impl FromStr for Clock {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "wall" => Ok(Clock::Wall),
            "off" | "none" => Ok(Clock::Off),
            other => Err(Error::invalid(format!(
                "unknown clock '{other}' (expected wall or off)"
            ))),
        }
    }
}

/// Accumulates time spent inside [`StepTimer::time`] only, so probe and
/// bookkeeping cost between steps is excluded.
#[derive(Debug, Clone)]
pub struct StepTimer {
    clock: Clock,
    total: Duration,
}

impl StepTimer {
    pub fn new(clock: Clock) -> Self {
        StepTimer {
            clock,
            total: Duration::ZERO,
        }
    }

    pub fn time<R>(&mut self, f: impl FnOnce() -> R) -> R {
        match self.clock {
            Clock::Off => f(),
            Clock::Wall => {
                let start = Instant::now();
                let out = f();
                self.total += start.elapsed();
                out
            }
        }
    }

    pub fn elapsed(&self) -> Duration {
        self.total
    }

    pub fn elapsed_secs(&self) -> f64 {
        self.total.as_secs_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn untimed_is_zero() {
        assert_eq!(StepTimer::new(Clock::Wall).elapsed_secs(), 0.0);
    }

    #[test]
    fn wall_clock_is_monotone() {
        let mut timer = StepTimer::new(Clock::Wall);
        let mut prev = 0.0;
        for _ in 0..5 {
            timer.time(|| std::thread::sleep(Duration::from_millis(1)));
            assert!(timer.elapsed_secs() >= prev);
            prev = timer.elapsed_secs();
        }
        assert!(prev >= 0.005);
    }

    #[test]
    fn clock_off_records_nothing() {
        let mut timer = StepTimer::new(Clock::Off);
        let v = timer.time(|| {
            std::thread::sleep(Duration::from_millis(1));
            7
        });
        assert_eq!(v, 7);
        assert_eq!(timer.elapsed_secs(), 0.0);
    }
}
