use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;

use super::context::{Channel, ComputeContext, MergeContext};
use super::exec::{run_loop, BspOutcome, Executor, Slot};
use super::message::{Message, Origin, Phase};
use super::stats::{MergeStats, RunStats, TimestepStats, TraceEvent};
use super::{EngineError, IbspApp, PatternMode, DEFAULT_MAX_SUPERSTEPS};
use crate::model::{ElementClass, IS_EXISTS};
use crate::partition::{SubgraphId, SubgraphIndex, SubgraphTemplate};
use crate::store::{Deployment, FetchTally, Projection, SubgraphInstance};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub workers_per_host: usize,
    /// Only instances intersecting `[start, end)` are processed.
    pub time_range: Option<(i64, i64)>,
    /// Application input, delivered to every sub-graph at superstep 1 of the
    /// first timestep (of every timestep unless sequentially dependent).
    pub initial_messages: Vec<Vec<u8>>,
    pub max_supersteps: usize,
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            workers_per_host: 1,
            time_range: None,
            initial_messages: Vec::new(),
            max_supersteps: DEFAULT_MAX_SUPERSTEPS,
            trace: false,
        }
    }
}

#[derive(Debug)]
pub struct RunResult<O> {
    /// Timestep → sub-graph → output.
    pub outputs: BTreeMap<usize, BTreeMap<SubgraphId, O>>,
    /// Sub-graph → merge output.
    pub merged: BTreeMap<SubgraphId, O>,
    pub stats: RunStats,
    pub trace: Vec<TraceEvent>,
}

impl<O> RunResult<O> {
    pub fn last_timestep(&self) -> Option<&BTreeMap<SubgraphId, O>> {
        self.outputs.values().next_back()
    }
}

struct TimestepResult<O> {
    outputs: BTreeMap<SubgraphId, O>,
    bsp: BspOutcome,
    stats: TimestepStats,
}

struct Runner<'a, A> {
    app: &'a A,
    deployment: &'a Deployment,
    pattern: PatternMode,
    config: &'a RunConfig,
    known: Vec<SubgraphId>,
    indices: HashMap<SubgraphId, Arc<SubgraphIndex>>,
    projections: Vec<Projection>,
    positions: Vec<usize>,
    open_reads: (u64, u64),
    t0: Instant,
    trace: Option<Mutex<Vec<TraceEvent>>>,
}

impl<A: IbspApp> Runner<'_, A> {
    fn timestep(
        &self,
        k: usize,
        seeds: Vec<(SubgraphId, Message)>,
        exec: &Executor,
    ) -> Result<TimestepResult<A::Output>, EngineError> {
        let started = Instant::now();
        let start_us = self.t0.elapsed().as_micros() as u64;
        let pos = self.positions[k];
        let timestep = k + 1;
        let mut tally = FetchTally::default();
        let mut views: Vec<(SubgraphInstance, Arc<SubgraphIndex>)> = Vec::with_capacity(self.known.len());
        for (h, host) in self.deployment.hosts().iter().enumerate() {
            for sg in host.get_subgraphs() {
                let (inst, t) = host.load_instance(sg.id, pos, &self.projections[h])?;
                tally += t;
                views.push((inst, self.indices[&sg.id].clone()));
            }
        }
        views.sort_by_key(|(i, _)| i.id());

        let inputs = self.pattern != PatternMode::SequentiallyDependent || k == 0;
        let mut inboxes: BTreeMap<SubgraphId, Vec<Message>> = BTreeMap::new();
        for (target, msg) in seeds {
            inboxes.entry(target).or_default().push(msg);
        }
        let mut slots: Vec<Slot<A::State>> = views
            .iter()
            .map(|(inst, _)| {
                let mut inbox: Vec<Message> = Vec::new();
                if inputs {
                    inbox.extend(self.config.initial_messages.iter().enumerate().map(|(i, p)| Message {
                        payload: p.clone(),
                        origin: Origin::Input,
                        seq: i as u32,
                    }));
                }
                inbox.extend(inboxes.remove(&inst.id()).unwrap_or_default());
                Slot::new(inst.id(), inbox)
            })
            .collect();

        let last = k + 1 == self.positions.len();
        let directed = self.deployment.is_directed();
        let bsp = run_loop(
            &mut slots,
            &views,
            exec,
            Phase::Timestep(timestep),
            self.config.max_supersteps,
            self.trace.as_ref(),
            |(inst, index), id, inv| {
                let mut ctx = ComputeContext {
                    instance: inst,
                    index,
                    timestep,
                    superstep: inv.superstep,
                    messages: inv.messages,
                    state: inv.state,
                    directed,
                    pattern: self.pattern,
                    last_timestep: last,
                    channel: Channel { id, known: &self.known, aggregated: inv.aggregated, out: inv.out },
                };
                self.app.compute(&mut ctx).map_err(|e| e.0)
            },
        )?;

        let outputs = slots
            .into_iter()
            .zip(&views)
            .filter_map(|(slot, (inst, _))| self.app.output(inst, slot.state).map(|o| (slot.id, o)))
            .collect();
        let dropped = if last { bsp.deferred.len() as u64 } else { 0 };
        if dropped > 0 {
            log::warn!("dropped {dropped} next-timestep message(s) sent from the last timestep");
        }
        let open = if k == 0 { self.open_reads } else { (0, 0) };
        let stats = TimestepStats {
            timestep,
            instance: pos,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            start_us,
            end_us: self.t0.elapsed().as_micros() as u64,
            supersteps: bsp.supersteps,
            msgs_intra: bsp.intra,
            msgs_cross: (bsp.deferred.len() + bsp.merge.len()) as u64,
            msgs_remote: bsp.remote,
            msgs_dropped: dropped,
            slices_read: tally.disk_reads + open.0,
            cache_hits: tally.hits,
            bytes_read: tally.bytes + open.1,
        };
        Ok(TimestepResult { outputs, bsp, stats })
    }

    fn merge(
        &self,
        msgs: Vec<(SubgraphId, Message)>,
        exec: &Executor,
    ) -> Result<(BTreeMap<SubgraphId, A::Output>, MergeStats), EngineError> {
        let started = Instant::now();
        let msgs_in = msgs.len() as u64;
        let mut views: Vec<Arc<SubgraphTemplate>> =
            self.deployment.hosts().iter().flat_map(|h| h.get_subgraphs().cloned()).collect();
        views.sort_by_key(|t| t.id);
        let mut inboxes: BTreeMap<SubgraphId, Vec<Message>> = BTreeMap::new();
        for (origin, msg) in msgs {
            inboxes.entry(origin).or_default().push(msg);
        }
        let mut slots: Vec<Slot<A::MergeState>> =
            views.iter().map(|t| Slot::new(t.id, inboxes.remove(&t.id).unwrap_or_default())).collect();
        let bsp = run_loop(
            &mut slots,
            &views,
            exec,
            Phase::Merge,
            self.config.max_supersteps,
            self.trace.as_ref(),
            |template, id, inv| {
                let mut ctx = MergeContext {
                    template,
                    superstep: inv.superstep,
                    messages: inv.messages,
                    state: inv.state,
                    channel: Channel { id, known: &self.known, aggregated: inv.aggregated, out: inv.out },
                };
                self.app.merge(&mut ctx).map_err(|e| e.0)
            },
        )?;
        let outputs = slots
            .into_iter()
            .zip(&views)
            .filter_map(|(slot, t)| self.app.merge_output(t, slot.state).map(|o| (slot.id, o)))
            .collect();
        let stats = MergeStats {
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            supersteps: bsp.supersteps,
            msgs_in,
            msgs_intra: bsp.intra,
        };
        Ok((outputs, stats))
    }
}

/// Runs `app` over the deployment's instances in the given pattern.
pub fn run<A: IbspApp>(
    app: &A,
    deployment: &Deployment,
    pattern: PatternMode,
    config: &RunConfig,
) -> Result<RunResult<A::Output>, EngineError> {
    if pattern == PatternMode::EventuallyDependent && !app.supports_merge() {
        return Err(EngineError::MergeRequired);
    }
    let t0 = Instant::now();
    let hosts = deployment.hosts();
    let mut projections = Vec::with_capacity(hosts.len());
    for h in hosts {
        let mut vattrs = app.vertex_attributes();
        let mut eattrs = app.edge_attributes();
        for (class, attrs) in [(ElementClass::Vertex, &mut vattrs), (ElementClass::Edge, &mut eattrs)] {
            if h.schema(class).iter().any(|a| a.name == IS_EXISTS) && !attrs.iter().any(|a| a == IS_EXISTS) {
                attrs.push(IS_EXISTS.to_string());
            }
        }
        projections.push(h.projection(&vattrs, &eattrs)?);
    }
    let positions: Vec<usize> = match (config.time_range, hosts.first()) {
        (Some((s, e)), Some(h)) => h.meta().instances_in(s, e).collect(),
        (None, _) => (0..deployment.instance_count()).collect(),
        (Some(_), None) => Vec::new(),
    };
    let directed = deployment.is_directed();
    let indices = hosts
        .iter()
        .flat_map(|h| h.get_subgraphs())
        .map(|sg| (sg.id, Arc::new(SubgraphIndex::new(sg, directed))))
        .collect();
    let c = deployment.counters();
    let runner = Runner {
        app,
        deployment,
        pattern,
        config,
        known: deployment.subgraph_ids(),
        indices,
        projections,
        positions,
        open_reads: (c.template_reads + c.meta_reads, c.open_bytes),
        t0,
        trace: config.trace.then(|| Mutex::new(Vec::new())),
    };

    let workers = config.workers_per_host.max(1);
    let n = runner.positions.len();
    let mut results: Vec<TimestepResult<A::Output>> = Vec::with_capacity(n);
    match pattern {
        PatternMode::SequentiallyDependent => {
            let exec = Executor::new(hosts.len(), workers)?;
            let mut carry = Vec::new();
            for k in 0..n {
                let mut r = runner.timestep(k, std::mem::take(&mut carry), &exec)?;
                carry = std::mem::take(&mut r.bsp.deferred);
                carry.sort_by_key(|(_, m)| (m.origin, m.seq));
                results.push(r);
            }
        }
        PatternMode::Independent | PatternMode::EventuallyDependent => {
            if workers > 1 && n > 1 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(workers * hosts.len().max(1))
                    .build()
                    .map_err(|e| EngineError::Setup(e.to_string()))?;
                results = pool.install(|| {
                    (0..n)
                        .into_par_iter()
                        .map(|k| runner.timestep(k, Vec::new(), &Executor::Inline))
                        .collect::<Result<Vec<_>, _>>()
                })?;
            } else {
                for k in 0..n {
                    results.push(runner.timestep(k, Vec::new(), &Executor::Inline)?);
                }
            }
        }
    }

    let mut stats = RunStats::default();
    let mut outputs = BTreeMap::new();
    let mut merge_msgs = Vec::new();
    for mut r in results {
        let mut m = std::mem::take(&mut r.bsp.merge);
        m.sort_by_key(|(_, msg)| (msg.origin, msg.seq));
        merge_msgs.extend(m);
        outputs.insert(r.stats.timestep, r.outputs);
        stats.timesteps.push(r.stats);
    }
    let mut merged = BTreeMap::new();
    if pattern == PatternMode::EventuallyDependent {
        let exec = Executor::new(hosts.len(), workers)?;
        let (out, ms) = runner.merge(merge_msgs, &exec)?;
        merged = out;
        stats.merge = Some(ms);
    }
    stats.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    let trace = runner.trace.map(|t| t.into_inner().unwrap()).unwrap_or_default();
    Ok(RunResult { outputs, merged, stats, trace })
}
