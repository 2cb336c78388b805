//! Superstep loop shared by timestep BSPs and the merge BSP.

use std::collections::BTreeMap;
use std::sync::Mutex;

use rayon::prelude::*;

use super::message::{Message, Origin, Outbox, Phase, Route};
use super::{EngineError, TraceEvent};
use crate::partition::SubgraphId;

pub(crate) struct Slot<S> {
    pub id: SubgraphId,
    pub state: S,
    pub halted: bool,
    pub inbox: Vec<Message>,
}

impl<S: Default> Slot<S> {
    pub fn new(id: SubgraphId, inbox: Vec<Message>) -> Self {
        Self { id, state: S::default(), halted: false, inbox }
    }
}

/// Runs the Compute calls of one superstep: inline, or on one pool per host.
pub(crate) enum Executor {
    Inline,
    Hosts(Vec<rayon::ThreadPool>),
}

impl Executor {
    pub fn new(hosts: usize, workers: usize) -> Result<Self, EngineError> {
        if workers <= 1 {
            return Ok(Executor::Inline);
        }
        let pools = (0..hosts)
            .map(|h| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(move |i| format!("host{h}-w{i}"))
                    .build()
                    .map_err(|e| EngineError::Setup(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Executor::Hosts(pools))
    }

    /// Applies `f` to every item; items must be grouped by host in ascending order.
    fn for_each<T: Send>(&self, items: &mut [T], host: impl Fn(&T) -> usize + Sync, f: impl Fn(&mut T) + Sync) {
        match self {
            Executor::Inline => items.iter_mut().for_each(f),
            Executor::Hosts(pools) => {
                let mut runs: Vec<(usize, &mut [T])> = Vec::new();
                let mut rest = items;
                while !rest.is_empty() {
                    let h = host(&rest[0]);
                    let n = rest.iter().take_while(|x| host(x) == h).count();
                    let (run, tail) = rest.split_at_mut(n);
                    runs.push((h, run));
                    rest = tail;
                }
                let f = &f;
                std::thread::scope(|scope| {
                    for (h, run) in runs {
                        let pool = &pools[h % pools.len()];
                        scope.spawn(move || pool.install(|| run.par_iter_mut().for_each(f)));
                    }
                });
            }
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct BspOutcome {
    pub supersteps: usize,
    pub intra: u64,
    /// Intra-phase messages whose target lives on another host.
    pub remote: u64,
    /// Next-timestep sends, in (origin, seq) order.
    pub deferred: Vec<(SubgraphId, Message)>,
    /// Merge sends, in (origin, seq) order.
    pub merge: Vec<(SubgraphId, Message)>,
}

pub(crate) struct Invocation<'a, S> {
    pub state: &'a mut S,
    pub messages: &'a [Message],
    pub superstep: usize,
    pub aggregated: &'a BTreeMap<String, f64>,
    pub out: &'a mut Outbox,
}

struct Work<'a, S, V> {
    slot: &'a mut Slot<S>,
    view: &'a V,
    inbox: Vec<Message>,
    out: Outbox,
    error: Option<String>,
}

/// Loops supersteps over `slots` (sorted by id) until everyone has halted
/// and no intra-phase message is in flight.
pub(crate) fn run_loop<S: Send, V: Sync>(
    slots: &mut [Slot<S>],
    views: &[V],
    exec: &Executor,
    phase: Phase,
    max_supersteps: usize,
    trace: Option<&Mutex<Vec<TraceEvent>>>,
    invoke: impl Fn(&V, SubgraphId, Invocation<'_, S>) -> Result<(), String> + Sync,
) -> Result<BspOutcome, EngineError> {
    debug_assert!(slots.windows(2).all(|w| w[0].id < w[1].id));
    let mut outcome = BspOutcome::default();
    let mut aggregated: BTreeMap<String, f64> = BTreeMap::new();
    let mut superstep = 0;
    loop {
        superstep += 1;
        if superstep > max_supersteps {
            return Err(EngineError::NonTermination { phase, supersteps: max_supersteps });
        }
        let first = superstep == 1;
        let mut work: Vec<Work<S, V>> = slots
            .iter_mut()
            .zip(views)
            .filter(|(s, _)| first || !s.halted || !s.inbox.is_empty())
            .map(|(slot, view)| {
                let inbox = std::mem::take(&mut slot.inbox);
                Work { slot, view, inbox, out: Outbox::default(), error: None }
            })
            .collect();
        if let Some(t) = trace {
            let mut t = t.lock().unwrap();
            for w in &work {
                t.push(TraceEvent {
                    phase,
                    superstep,
                    subgraph: w.slot.id,
                    was_halted: w.slot.halted,
                    received: w.inbox.iter().map(|m| m.origin).collect(),
                });
            }
        }
        let agg = &aggregated;
        exec.for_each(
            &mut work,
            |w| w.slot.id.partition().0 as usize,
            |w| {
                let inv = Invocation {
                    state: &mut w.slot.state,
                    messages: &w.inbox,
                    superstep,
                    aggregated: agg,
                    out: &mut w.out,
                };
                if let Err(e) = invoke(w.view, w.slot.id, inv) {
                    w.error = Some(e);
                }
            },
        );

        let mut next_agg: BTreeMap<String, f64> = BTreeMap::new();
        let mut delivered: Vec<(SubgraphId, Message)> = Vec::new();
        for w in &mut work {
            let id = w.slot.id;
            if let Some(v) = w.out.violation.take() {
                return Err(EngineError::Routing { subgraph: id, phase, superstep, what: v });
            }
            if let Some(e) = w.error.take() {
                return Err(EngineError::App { subgraph: id, phase, superstep, message: e });
            }
            w.slot.halted = w.out.halted;
            for (name, v) in w.out.aggregates.drain(..) {
                *next_agg.entry(name).or_insert(0.0) += v;
            }
            let origin = Origin::Subgraph { id, phase, superstep };
            for (seq, (route, payload)) in w.out.sends.drain(..).enumerate() {
                let msg = Message { payload, origin, seq: seq as u32 };
                match route {
                    Route::Subgraph(t) => {
                        outcome.intra += 1;
                        if t.partition() != id.partition() {
                            outcome.remote += 1;
                        }
                        delivered.push((t, msg));
                    }
                    Route::NextTimestep(t) => outcome.deferred.push((t, msg)),
                    Route::Merge => outcome.merge.push((id, msg)),
                }
            }
        }
        drop(work);
        let in_flight = !delivered.is_empty();
        for (t, msg) in delivered {
            let i = slots.binary_search_by_key(&t, |s| s.id).expect("targets are checked at send time");
            slots[i].inbox.push(msg);
        }
        aggregated = next_agg;
        if !in_flight && slots.iter().all(|s| s.halted) {
            outcome.supersteps = superstep;
            return Ok(outcome);
        }
    }
}
