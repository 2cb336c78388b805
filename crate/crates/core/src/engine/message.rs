use std::fmt;

use crate::partition::SubgraphId;

/// Outer-loop position: a 1-based timestep, or the merge phase after all timesteps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Timestep(usize),
    Merge,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Timestep(t) => write!(f, "timestep {t}"),
            Phase::Merge => f.write_str("merge"),
        }
    }
}

/// Where a message was sent from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    /// Application input from the run configuration.
    Input,
    Subgraph {
        id: SubgraphId,
        phase: Phase,
        superstep: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub payload: Vec<u8>,
    pub origin: Origin,
    /// Send order within the origin's superstep.
    pub seq: u32,
}

impl Message {
    pub fn sender(&self) -> Option<SubgraphId> {
        match self.origin {
            Origin::Input => None,
            Origin::Subgraph { id, .. } => Some(id),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Route {
    Subgraph(SubgraphId),
    NextTimestep(SubgraphId),
    Merge,
}

/// Everything one Compute or Merge invocation produced, merged at the barrier.
#[derive(Debug, Default)]
pub(crate) struct Outbox {
    pub sends: Vec<(Route, Vec<u8>)>,
    pub halted: bool,
    pub aggregates: Vec<(String, f64)>,
    pub violation: Option<String>,
}
