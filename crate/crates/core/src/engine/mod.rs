//! Iterative BSP over the instances of a deployed collection.
//!
//! A run is an outer loop over timesteps (one per instance) around an inner
//! loop of barrier-synchronised supersteps over sub-graphs. How timesteps
//! relate is fixed by the [`PatternMode`].

mod context;
mod exec;
mod message;
mod run;
mod stats;

use std::fmt;

use crate::partition::{SubgraphId, SubgraphTemplate};
use crate::store::{StoreError, SubgraphInstance};

pub use context::{ComputeContext, MergeContext};
pub use message::{Message, Origin, Phase};
pub use run::{run, RunConfig, RunResult};
pub use stats::{MergeStats, RunStats, TimestepStats, TraceEvent, STATS_CSV_HEADER};

pub const DEFAULT_MAX_SUPERSTEPS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PatternMode {
    /// Every instance is analysed on its own; timesteps may run concurrently.
    Independent,
    /// As independent, followed by a Merge phase fed by `send_to_merge`.
    EventuallyDependent,
    /// Timesteps run in time order, handing messages forward.
    SequentiallyDependent,
}

impl fmt::Display for PatternMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternMode::Independent => "independent",
            PatternMode::EventuallyDependent => "eventually-dependent",
            PatternMode::SequentiallyDependent => "sequentially-dependent",
        })
    }
}

/// Failure raised by application code.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct AppError(pub String);

impl From<String> for AppError {
    fn from(s: String) -> Self {
        AppError(s)
    }
}

impl From<&str> for AppError {
    fn from(s: &str) -> Self {
        AppError(s.to_string())
    }
}

impl From<StoreError> for AppError {
    fn from(e: StoreError) -> Self {
        AppError(e.to_string())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("{subgraph} failed at {phase}, superstep {superstep}: {message}")]
    App { subgraph: SubgraphId, phase: Phase, superstep: usize, message: String },
    #[error("{subgraph} at {phase}, superstep {superstep}: {what}")]
    Routing { subgraph: SubgraphId, phase: Phase, superstep: usize, what: String },
    #[error("nontermination guard: {phase} exceeded {supersteps} supersteps")]
    NonTermination { phase: Phase, supersteps: usize },
    #[error("eventually dependent runs need an application with a Merge step")]
    MergeRequired,
    #[error("engine setup failed: {0}")]
    Setup(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// A sub-graph centric iBSP application.
///
/// `State` lives for one sub-graph across the supersteps of one timestep;
/// anything carried further must travel in messages.
pub trait IbspApp: Sync {
    type State: Default + Send;
    type MergeState: Default + Send;
    type Output: Send;

    /// Vertex attributes to load. `isExists` is added by the engine when declared.
    fn vertex_attributes(&self) -> Vec<String> {
        Vec::new()
    }

    fn edge_attributes(&self) -> Vec<String> {
        Vec::new()
    }

    fn compute(&self, ctx: &mut ComputeContext<'_, Self::State>) -> Result<(), AppError>;

    /// Result of one sub-graph for one timestep, taken when its BSP ends.
    fn output(&self, _instance: &SubgraphInstance, _state: Self::State) -> Option<Self::Output> {
        None
    }

    fn supports_merge(&self) -> bool {
        false
    }

    fn merge(&self, _ctx: &mut MergeContext<'_, Self::MergeState>) -> Result<(), AppError> {
        Err(AppError("this application has no merge step".into()))
    }

    fn merge_output(&self, _template: &SubgraphTemplate, _state: Self::MergeState) -> Option<Self::Output> {
        None
    }
}
