//! Temporal path traversal: follow a target through successive instances.
//!
//! Vertices record sightings in a string attribute, one value per sighting,
//! written `<target>@<timestamp>` (a bare `<target>` is stamped with the
//! instance start). Superstep 1 of the first timestep searches from the
//! initial location; superstep 1 of a later timestep searches from the
//! latest sighting handed over by the previous one; later supersteps search
//! from the vertices other sub-graphs crossed into. The search walks up to
//! `search_depth` hops, starting afresh at every sighting.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use super::codec::{decode, encode};
use crate::engine::{AppError, ComputeContext, IbspApp, RunResult};
use crate::model::{ElementRef, Value, VertexId};
use crate::partition::SubgraphId;
use crate::store::SubgraphInstance;

pub const DEFAULT_SEARCH_DEPTH: u32 = 3;
pub const DEFAULT_SIGHTING_ATTR: &str = "sighting";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Sighting {
    pub vertex: VertexId,
    pub time: i64,
}

pub struct TrackApp {
    pub initial_location: VertexId,
    pub target: String,
    pub search_depth: u32,
    pub sighting_attr: String,
}

impl TrackApp {
    pub fn new(initial_location: VertexId, target: &str) -> Self {
        Self {
            initial_location,
            target: target.into(),
            search_depth: DEFAULT_SEARCH_DEPTH,
            sighting_attr: DEFAULT_SIGHTING_ATTR.into(),
        }
    }

    pub fn with_search_depth(mut self, depth: u32) -> Self {
        self.search_depth = depth;
        self
    }

    pub fn with_sighting_attr(mut self, name: &str) -> Self {
        self.sighting_attr = name.into();
        self
    }

    fn parse(&self, v: &Value, default_time: i64) -> Option<i64> {
        let s = v.as_str()?;
        match s.rsplit_once('@') {
            Some((id, t)) if id == self.target => t.parse().ok(),
            None if s == self.target => Some(default_time),
            _ => None,
        }
    }
}

#[derive(Default)]
pub struct TrackState {
    /// Roots already searched from in this timestep.
    searched: HashSet<VertexId>,
    crossed: HashSet<(SubgraphId, VertexId)>,
    found: BTreeSet<Sighting>,
}

type Found = (BTreeSet<(SubgraphId, VertexId)>, BTreeSet<Sighting>);

impl TrackApp {
    /// Bounded walk from `roots`; returns the remote crossings and sightings.
    fn dfs(&self, ctx: &ComputeContext<'_, TrackState>, roots: &[VertexId]) -> Result<Found, AppError> {
        let inst = ctx.instance;
        let mut remote = BTreeSet::new();
        let mut found = BTreeSet::new();
        let mut budget: BTreeMap<VertexId, u32> = BTreeMap::new();
        let mut stack: Vec<(VertexId, u32)> = Vec::new();
        for &r in roots.iter().rev() {
            if ctx.index.position(r).is_some() && inst.vertex_exists(r)? {
                stack.push((r, self.search_depth));
            }
        }
        while let Some((v, b)) = stack.pop() {
            if budget.get(&v).is_some_and(|&seen| seen >= b) {
                continue;
            }
            budget.insert(v, b);
            let mut left = b;
            for val in inst.values(ElementRef::Vertex(v), &self.sighting_attr)? {
                if let Some(time) = self.parse(val, inst.start) {
                    found.insert(Sighting { vertex: v, time });
                    left = self.search_depth;
                }
            }
            if left > b {
                budget.insert(v, left);
            }
            if left == 0 {
                continue;
            }
            for oe in ctx.index.out_edges(v).iter().rev() {
                if !inst.exists(ElementRef::Edge(oe.edge))? {
                    continue;
                }
                match oe.remote {
                    Some(sg) => {
                        remote.insert((sg, oe.to));
                    }
                    None => {
                        if inst.vertex_exists(oe.to)? {
                            stack.push((oe.to, left - 1));
                        }
                    }
                }
            }
        }
        Ok((remote, found))
    }
}

impl IbspApp for TrackApp {
    type State = TrackState;
    type MergeState = ();
    type Output = Vec<Sighting>;

    fn vertex_attributes(&self) -> Vec<String> {
        vec![self.sighting_attr.clone()]
    }

    fn compute(&self, ctx: &mut ComputeContext<'_, Self::State>) -> Result<(), AppError> {
        let mut roots = Vec::new();
        if ctx.superstep == 1 {
            if ctx.timestep == 1 {
                roots.push(self.initial_location);
            } else {
                let mut latest: Option<Sighting> = None;
                for m in ctx.messages.iter().filter(|m| m.sender().is_some()) {
                    for (vertex, time) in decode(&m.payload, |r| Ok((r.u64()?, r.i64()?)))? {
                        let s = Sighting { vertex, time };
                        if latest.is_none_or(|l| {
                            (s.time, std::cmp::Reverse(s.vertex)) > (l.time, std::cmp::Reverse(l.vertex))
                        }) {
                            latest = Some(s);
                        }
                    }
                }
                roots.extend(latest.map(|s| s.vertex));
            }
        } else {
            for m in ctx.messages {
                roots.extend(decode(&m.payload, |r| r.u64())?);
            }
        }
        roots.retain(|v| ctx.state.searched.insert(*v));

        let (remote, found) = self.dfs(ctx, &roots)?;
        let mut by_target: BTreeMap<SubgraphId, Vec<VertexId>> = BTreeMap::new();
        for (sg, v) in remote {
            if ctx.state.crossed.insert((sg, v)) {
                by_target.entry(sg).or_default().push(v);
            }
        }
        for (sg, vs) in by_target {
            ctx.send_to_subgraph(sg, encode(&vs, |w, v| w.u64(*v)))?;
        }
        let fresh: Vec<Sighting> = found.into_iter().filter(|s| ctx.state.found.insert(*s)).collect();
        if !fresh.is_empty() && !ctx.is_last_timestep() {
            ctx.send_to_next_timestep(encode(&fresh, |w, s| {
                w.u64(s.vertex);
                w.i64(s.time);
            }))?;
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn output(&self, _: &SubgraphInstance, state: Self::State) -> Option<Self::Output> {
        (!state.found.is_empty()).then(|| state.found.into_iter().collect())
    }
}

/// The latest sighting of each timestep that has one, across all sub-graphs.
pub fn assemble_track(result: &RunResult<Vec<Sighting>>) -> Vec<(usize, Sighting)> {
    result
        .outputs
        .iter()
        .filter_map(|(t, outs)| {
            outs.values().flatten().max_by_key(|s| (s.time, std::cmp::Reverse(s.vertex))).map(|s| (*t, *s))
        })
        .collect()
}
