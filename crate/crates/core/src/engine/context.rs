use std::collections::BTreeMap;

use super::message::{Message, Outbox, Route};
use super::{AppError, PatternMode};
use crate::partition::{SubgraphId, SubgraphIndex, SubgraphTemplate};
use crate::store::SubgraphInstance;

/// Shared send/vote/aggregate plumbing of both contexts.
pub(crate) struct Channel<'a> {
    pub id: SubgraphId,
    pub known: &'a [SubgraphId],
    pub aggregated: &'a BTreeMap<String, f64>,
    pub out: &'a mut Outbox,
}

impl Channel<'_> {
    fn reject(&mut self, what: String) -> AppError {
        if self.out.violation.is_none() {
            self.out.violation = Some(what.clone());
        }
        AppError(what)
    }

    fn check_target(&mut self, target: SubgraphId) -> Result<(), AppError> {
        if self.known.binary_search(&target).is_ok() {
            Ok(())
        } else {
            Err(self.reject(format!("unknown target sub-graph {target}")))
        }
    }

    fn send(&mut self, route: Route, payload: Vec<u8>) {
        self.out.sends.push((route, payload));
    }
}

/// What Compute sees for one sub-graph instance in one superstep.
pub struct ComputeContext<'a, S> {
    pub instance: &'a SubgraphInstance,
    pub index: &'a SubgraphIndex,
    /// 1-based.
    pub timestep: usize,
    /// 1-based within the timestep.
    pub superstep: usize,
    pub messages: &'a [Message],
    pub state: &'a mut S,
    pub directed: bool,
    pub(crate) pattern: PatternMode,
    pub(crate) last_timestep: bool,
    pub(crate) channel: Channel<'a>,
}

impl<S> ComputeContext<'_, S> {
    pub fn subgraph(&self) -> SubgraphId {
        self.channel.id
    }

    pub fn template(&self) -> &SubgraphTemplate {
        &self.instance.template
    }

    pub fn pattern(&self) -> PatternMode {
        self.pattern
    }

    pub fn is_last_timestep(&self) -> bool {
        self.last_timestep
    }

    /// Delivered at the next superstep of this timestep.
    pub fn send_to_subgraph(&mut self, target: SubgraphId, payload: impl Into<Vec<u8>>) -> Result<(), AppError> {
        self.channel.check_target(target)?;
        self.channel.send(Route::Subgraph(target), payload.into());
        Ok(())
    }

    fn check_sequential(&mut self, what: &str) -> Result<(), AppError> {
        if self.pattern == PatternMode::SequentiallyDependent {
            Ok(())
        } else {
            Err(self.channel.reject(format!("{what} is not allowed in {:?} mode", self.pattern)))
        }
    }

    /// Delivered to this sub-graph at superstep 1 of the next timestep.
    pub fn send_to_next_timestep(&mut self, payload: impl Into<Vec<u8>>) -> Result<(), AppError> {
        let id = self.channel.id;
        self.send_to_subgraph_in_next_timestep(id, payload)
    }

    /// Delivered to `target` at superstep 1 of the next timestep.
    pub fn send_to_subgraph_in_next_timestep(
        &mut self,
        target: SubgraphId,
        payload: impl Into<Vec<u8>>,
    ) -> Result<(), AppError> {
        self.check_sequential("sending to the next timestep")?;
        self.channel.check_target(target)?;
        self.channel.send(Route::NextTimestep(target), payload.into());
        Ok(())
    }

    /// Buffered until every timestep has finished, then handed to Merge.
    pub fn send_to_merge(&mut self, payload: impl Into<Vec<u8>>) -> Result<(), AppError> {
        if self.pattern != PatternMode::EventuallyDependent {
            return Err(self.channel.reject(format!("sending to merge is not allowed in {:?} mode", self.pattern)));
        }
        self.channel.send(Route::Merge, payload.into());
        Ok(())
    }

    pub fn vote_to_halt(&mut self) {
        self.channel.out.halted = true;
    }

    /// Adds `value` to the global sum `name`, readable by everyone next superstep.
    pub fn aggregate(&mut self, name: &str, value: f64) {
        self.channel.out.aggregates.push((name.to_string(), value));
    }

    /// Sum of the contributions to `name` made in the previous superstep.
    pub fn aggregated(&self, name: &str) -> Option<f64> {
        self.channel.aggregated.get(name).copied()
    }

    /// Every sub-graph id of the deployment, ascending.
    pub fn all_subgraphs(&self) -> &[SubgraphId] {
        self.channel.known
    }
}

/// What Merge sees for one sub-graph template in one merge superstep.
pub struct MergeContext<'a, M> {
    pub template: &'a SubgraphTemplate,
    /// 1-based within the merge phase.
    pub superstep: usize,
    pub messages: &'a [Message],
    pub state: &'a mut M,
    pub(crate) channel: Channel<'a>,
}

impl<M> MergeContext<'_, M> {
    pub fn subgraph(&self) -> SubgraphId {
        self.channel.id
    }

    /// Every sub-graph id of the deployment, ascending.
    pub fn all_subgraphs(&self) -> &[SubgraphId] {
        self.channel.known
    }

    /// The smallest sub-graph id; a natural place to reduce partial results.
    pub fn root(&self) -> SubgraphId {
        self.channel.known[0]
    }

    pub fn send_to_subgraph(&mut self, target: SubgraphId, payload: impl Into<Vec<u8>>) -> Result<(), AppError> {
        self.channel.check_target(target)?;
        self.channel.send(Route::Subgraph(target), payload.into());
        Ok(())
    }

    pub fn vote_to_halt(&mut self) {
        self.channel.out.halted = true;
    }

    pub fn aggregate(&mut self, name: &str, value: f64) {
        self.channel.out.aggregates.push((name.to_string(), value));
    }

    pub fn aggregated(&self, name: &str) -> Option<f64> {
        self.channel.aggregated.get(name).copied()
    }
}
