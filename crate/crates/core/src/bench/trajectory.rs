use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::solvers::Method;
use crate::{Error, Result};

pub const TRAJECTORY_HEADER: [&str; 6] = ["method", "iteration", "elapsed_s", "objective", "suboptimality", "rank"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub iteration: usize,
    /// Cumulative solver time in seconds.
    pub elapsed: f64,
    pub objective: f64,
    pub suboptimality: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    /// Iterations strictly increasing, elapsed time non-decreasing.
    pub fn is_well_ordered(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[0].iteration < w[1].iteration && w[0].elapsed <= w[1].elapsed)
    }
}

#[derive(Serialize, Deserialize)]
struct Row {
    method: String,
    iteration: usize,
    elapsed_s: f64,
    objective: f64,
    suboptimality: f64,
    rank: usize,
}

/// Writes `method,iteration,elapsed_s,objective,suboptimality,rank` with one
/// header line. Floats use the shortest representation that round-trips.
pub fn write_trajectories<W: Write>(out: W, runs: &[(Method, &Trajectory)]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    wtr.write_record(TRAJECTORY_HEADER)?;
    for (method, traj) in runs {
        for r in &traj.records {
            wtr.serialize(Row {
                method: method.as_str().to_owned(),
                iteration: r.iteration,
                elapsed_s: r.elapsed,
                objective: r.objective,
                suboptimality: r.suboptimality,
                rank: r.rank,
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads trajectories back, grouped by method in order of first appearance.
pub fn read_trajectories<R: Read>(input: R) -> Result<Vec<(Method, Trajectory)>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(Error::invalid(format!("unexpected trajectory header: {header:?}")));
    }
    let mut out: Vec<(Method, Trajectory)> = Vec::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        let method: Method = row.method.parse()?;
        let record = Record {
            iteration: row.iteration,
            elapsed: row.elapsed_s,
            objective: row.objective,
            suboptimality: row.suboptimality,
            rank: row.rank,
        };
        match out.iter_mut().find(|(m, _)| *m == method) {
            Some((_, traj)) => traj.records.push(record),
            None => out.push((method, Trajectory { records: vec![record] })),
        }
    }
    Ok(out)
}
