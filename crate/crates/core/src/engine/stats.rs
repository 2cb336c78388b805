use std::fmt::Write as _;

use super::message::Phase;
use crate::partition::SubgraphId;

pub const STATS_CSV_HEADER: &str = "timestep,wall_ms,supersteps,msgs_intra,msgs_cross,slices_read,cache_hits";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimestepStats {
    /// 1-based.
    pub timestep: usize,
    /// Position of the instance in the collection.
    pub instance: usize,
    pub wall_ms: f64,
    /// Microseconds since the run started.
    pub start_us: u64,
    pub end_us: u64,
    pub supersteps: usize,
    /// Messages between sub-graphs within the timestep.
    pub msgs_intra: u64,
    /// Messages sent to a later timestep or to merge.
    pub msgs_cross: u64,
    /// Intra-timestep messages that crossed hosts.
    pub msgs_remote: u64,
    /// Next-timestep messages discarded because no timestep followed.
    pub msgs_dropped: u64,
    /// Slices read from disk, template and metadata included.
    pub slices_read: u64,
    pub cache_hits: u64,
    pub bytes_read: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MergeStats {
    pub wall_ms: f64,
    pub supersteps: usize,
    pub msgs_in: u64,
    pub msgs_intra: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    pub timesteps: Vec<TimestepStats>,
    pub merge: Option<MergeStats>,
    pub wall_ms: f64,
}

impl RunStats {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(STATS_CSV_HEADER);
        s.push('\n');
        for t in &self.timesteps {
            let _ = writeln!(
                s,
                "{},{:.3},{},{},{},{},{}",
                t.timestep, t.wall_ms, t.supersteps, t.msgs_intra, t.msgs_cross, t.slices_read, t.cache_hits
            );
        }
        s
    }

    pub fn total_slices_read(&self) -> u64 {
        self.timesteps.iter().map(|t| t.slices_read).sum()
    }

    pub fn dropped(&self) -> u64 {
        self.timesteps.iter().map(|t| t.msgs_dropped).sum()
    }
}

/// One Compute or Merge invocation, recorded when tracing is on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub phase: Phase,
    pub superstep: usize,
    pub subgraph: SubgraphId,
    /// Halt state going into the invocation.
    pub was_halted: bool,
    pub received: Vec<super::message::Origin>,
}
