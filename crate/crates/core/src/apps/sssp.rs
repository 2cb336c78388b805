//! Temporal single-source shortest paths, sequentially dependent.

use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::marker::PhantomData;

use serde::Serialize;

use super::codec::{decode, encode};
use super::{edge_weight, MinEntry, DEFAULT_LATENCY_ATTR};
use crate::engine::{AppError, ComputeContext, IbspApp};
use crate::model::VertexId;
use crate::num::Scalar;
use crate::partition::SubgraphId;
use crate::store::SubgraphInstance;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SsspMode {
    /// Shortest distances of each instance, folded into a running minimum.
    #[default]
    RunningMin,
    /// One journey through time: the source departs at the start of the
    /// first instance, an edge is traversed with the weights of the instance
    /// in which it is entered, and whatever lies past an instance's end
    /// waits for the next one.
    TimeBudget,
}

impl std::str::FromStr for SsspMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "running-min" => Ok(SsspMode::RunningMin),
            "time-budget" => Ok(SsspMode::TimeBudget),
            _ => Err(format!("unknown sssp mode `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SsspLabel<T> {
    pub dist: T,
    pub pred: Option<VertexId>,
}

pub struct SsspState<T> {
    /// Running minimum, or in time-budget mode every label so far.
    best: HashMap<VertexId, SsspLabel<T>>,
    /// This instance's distances (running-min mode).
    dist: HashMap<VertexId, SsspLabel<T>>,
    /// Labels already relaxed (time-budget mode).
    expanded: HashSet<VertexId>,
    origin: i64,
}

impl<T> Default for SsspState<T> {
    fn default() -> Self {
        Self { best: HashMap::new(), dist: HashMap::new(), expanded: HashSet::new(), origin: 0 }
    }
}

pub struct SsspApp<T> {
    pub source: VertexId,
    pub latency_attr: String,
    pub mode: SsspMode,
    _scalar: PhantomData<fn() -> T>,
}

impl<T: Scalar> SsspApp<T> {
    pub fn new(source: VertexId) -> Self {
        Self { source, latency_attr: DEFAULT_LATENCY_ATTR.into(), mode: SsspMode::RunningMin, _scalar: PhantomData }
    }

    pub fn with_mode(mut self, mode: SsspMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_latency_attr(mut self, name: &str) -> Self {
        self.latency_attr = name.into();
        self
    }
}

const NONE: u64 = u64::MAX;

fn pred_out(p: Option<VertexId>) -> u64 {
    p.unwrap_or(NONE)
}

fn pred_in(p: u64) -> Option<VertexId> {
    (p != NONE).then_some(p)
}

/// Relaxation: (vertex, dist, pred).
fn encode_relax<T: Scalar>(items: &[(VertexId, SsspLabel<T>)]) -> Vec<u8> {
    encode(items, |w, (v, l)| {
        w.u64(*v);
        w.f64(l.dist.to_wire());
        w.u64(pred_out(l.pred));
    })
}

fn decode_relax<T: Scalar>(payload: &[u8]) -> Result<Vec<(VertexId, SsspLabel<T>)>, AppError> {
    decode(payload, |r| {
        let v = r.u64()?;
        let dist = T::from_attr(r.f64()?);
        Ok((v, SsspLabel { dist, pred: pred_in(r.u64()?) }))
    })
}

/// Carried label: (vertex, dist, pred, expanded), after an i64 origin.
fn encode_carry<T: Scalar>(origin: i64, items: &[(VertexId, SsspLabel<T>, bool)]) -> Vec<u8> {
    let mut out = origin.to_le_bytes().to_vec();
    out.extend(encode(items, |w, (v, l, x)| {
        w.u64(*v);
        w.f64(l.dist.to_wire());
        w.u64(pred_out(l.pred));
        w.u8(*x as u8);
    }));
    out
}

type Carry<T> = (i64, Vec<(VertexId, SsspLabel<T>, bool)>);

fn decode_carry<T: Scalar>(payload: &[u8]) -> Result<Carry<T>, AppError> {
    if payload.len() < 8 {
        return Err(AppError("short carry message".into()));
    }
    let origin = i64::from_le_bytes(payload[..8].try_into().unwrap());
    let items = decode(&payload[8..], |r| {
        let v = r.u64()?;
        let dist = T::from_attr(r.f64()?);
        let pred = pred_in(r.u64()?);
        Ok((v, SsspLabel { dist, pred }, r.u8()? != 0))
    })?;
    Ok((origin, items))
}

impl<T: Scalar> SsspApp<T> {
    fn owns(&self, ctx: &ComputeContext<'_, SsspState<T>>, v: VertexId) -> Result<bool, AppError> {
        Ok(ctx.index.position(v).is_some() && ctx.instance.vertex_exists(v)?)
    }

    /// Hands labels to the next timestep. In time-budget mode superstep 1
    /// always sends, so every sub-graph learns the departure time.
    fn carry(
        &self,
        ctx: &mut ComputeContext<'_, SsspState<T>>,
        items: &[(VertexId, SsspLabel<T>, bool)],
    ) -> Result<(), AppError> {
        let force = self.mode == SsspMode::TimeBudget && ctx.superstep == 1;
        if (items.is_empty() && !force) || ctx.is_last_timestep() {
            return Ok(());
        }
        let payload = encode_carry(ctx.state.origin, items);
        ctx.send_to_next_timestep(payload)
    }

    /// Labels from the previous timestep, minimum per vertex; equal
    /// distances keep the first label, any expanded copy marks it expanded.
    fn take_carried(&self, ctx: &mut ComputeContext<'_, SsspState<T>>) -> Result<Vec<VertexId>, AppError> {
        let mut carried: BTreeMap<VertexId, (SsspLabel<T>, bool)> = BTreeMap::new();
        ctx.state.origin = ctx.instance.start;
        for m in ctx.messages.iter().filter(|m| m.sender().is_some()) {
            let (origin, items) = decode_carry::<T>(&m.payload)?;
            ctx.state.origin = origin;
            for (v, l, x) in items {
                match carried.get_mut(&v) {
                    Some((cur, cx)) => {
                        if l.dist < cur.dist {
                            *cur = l;
                            *cx = x;
                        } else if l.dist == cur.dist {
                            *cx |= x;
                        }
                    }
                    None => {
                        carried.insert(v, (l, x));
                    }
                }
            }
        }
        let st = &mut *ctx.state;
        for (&v, &(l, x)) in &carried {
            st.best.insert(v, l);
            if x {
                st.expanded.insert(v);
            }
        }
        let items: Vec<_> = carried.iter().map(|(v, (l, x))| (*v, *l, *x)).collect();
        self.carry(ctx, &items)?;
        Ok(carried.into_keys().collect())
    }

    /// Dijkstra from `seeds` over the labels in `labels`; remote relaxations
    /// are batched per target. `budget` stops expansion at or beyond it.
    fn dijkstra(
        &self,
        ctx: &mut ComputeContext<'_, SsspState<T>>,
        seeds: Vec<VertexId>,
        budget: Option<T>,
    ) -> Result<(Vec<VertexId>, Vec<VertexId>), AppError> {
        let running = budget.is_none();
        let mut heap = BinaryHeap::new();
        {
            let labels = if running { &ctx.state.dist } else { &ctx.state.best };
            for v in seeds {
                heap.push(MinEntry(labels[&v].dist, v));
            }
        }
        let mut improved = Vec::new();
        let mut expanded = Vec::new();
        let mut remote: BTreeMap<SubgraphId, BTreeMap<VertexId, SsspLabel<T>>> = BTreeMap::new();
        while let Some(MinEntry(d, u)) = heap.pop() {
            let labels = if running { &ctx.state.dist } else { &ctx.state.best };
            if labels.get(&u).is_some_and(|l| d > l.dist) {
                continue;
            }
            if let Some(b) = budget {
                if d >= b || !ctx.state.expanded.insert(u) {
                    continue;
                }
                expanded.push(u);
            }
            for oe in ctx.index.out_edges(u) {
                let Some(w) = edge_weight::<T>(ctx.instance, oe.edge, &self.latency_attr)? else {
                    continue;
                };
                let label = SsspLabel { dist: d + w, pred: Some(u) };
                if let Some(sg) = oe.remote {
                    let slot = remote.entry(sg).or_default();
                    if slot.get(&oe.to).is_none_or(|l| label.dist < l.dist) {
                        slot.insert(oe.to, label);
                    }
                    continue;
                }
                let labels = if running { &mut ctx.state.dist } else { &mut ctx.state.best };
                if labels.get(&oe.to).is_none_or(|l| label.dist < l.dist) {
                    labels.insert(oe.to, label);
                    ctx.state.expanded.remove(&oe.to);
                    improved.push(oe.to);
                    heap.push(MinEntry(label.dist, oe.to));
                }
            }
        }
        for (sg, items) in remote {
            let items: Vec<_> = items.into_iter().collect();
            ctx.send_to_subgraph(sg, encode_relax(&items))?;
        }
        Ok((improved, expanded))
    }

    fn running_min(&self, ctx: &mut ComputeContext<'_, SsspState<T>>) -> Result<(), AppError> {
        let mut seeds = Vec::new();
        if ctx.superstep == 1 {
            self.take_carried(ctx)?;
            if self.owns(ctx, self.source)? {
                ctx.state.dist.insert(self.source, SsspLabel { dist: T::zero(), pred: None });
                seeds.push(self.source);
            }
        } else {
            seeds = self.receive(ctx, false)?;
        }
        let (mut improved, _) = self.dijkstra(ctx, seeds.clone(), None)?;
        improved.extend(seeds);
        improved.sort_unstable();
        improved.dedup();
        let mut carry = Vec::new();
        let st = &mut *ctx.state;
        for v in improved {
            let l = st.dist[&v];
            if st.best.get(&v).is_none_or(|b| l.dist < b.dist) {
                st.best.insert(v, l);
                carry.push((v, l, false));
            }
        }
        self.carry(ctx, &carry)
    }

    /// Applies incoming relaxations to owned, existing vertices.
    fn receive(
        &self,
        ctx: &mut ComputeContext<'_, SsspState<T>>,
        budget_mode: bool,
    ) -> Result<Vec<VertexId>, AppError> {
        let mut seeds = Vec::new();
        let msgs = ctx.messages;
        for m in msgs {
            for (v, l) in decode_relax::<T>(&m.payload)? {
                if !self.owns(ctx, v)? {
                    continue;
                }
                let labels = if budget_mode { &mut ctx.state.best } else { &mut ctx.state.dist };
                if labels.get(&v).is_none_or(|cur| l.dist < cur.dist) {
                    labels.insert(v, l);
                    ctx.state.expanded.remove(&v);
                    seeds.push(v);
                }
            }
        }
        seeds.sort_unstable();
        seeds.dedup();
        Ok(seeds)
    }

    fn time_budget(&self, ctx: &mut ComputeContext<'_, SsspState<T>>) -> Result<(), AppError> {
        let mut seeds;
        let mut fresh = Vec::new();
        if ctx.superstep == 1 {
            seeds = self.take_carried(ctx)?;
            seeds.retain(|v| !ctx.state.expanded.contains(v));
            if ctx.timestep == 1 && self.owns(ctx, self.source)? {
                ctx.state.best.insert(self.source, SsspLabel { dist: T::zero(), pred: None });
                ctx.state.expanded.remove(&self.source);
                seeds.push(self.source);
                fresh.push(self.source);
            }
        } else {
            seeds = self.receive(ctx, true)?;
            fresh.extend(&seeds);
        }
        let budget = T::from_i64(ctx.instance.end - ctx.state.origin).unwrap_or_else(T::infinity);
        let (improved, expanded) = self.dijkstra(ctx, seeds, Some(budget))?;
        fresh.extend(improved);
        fresh.extend(expanded);
        fresh.sort_unstable();
        fresh.dedup();
        let st = &*ctx.state;
        let carry: Vec<_> = fresh.into_iter().map(|v| (v, st.best[&v], st.expanded.contains(&v))).collect();
        self.carry(ctx, &carry)
    }
}

impl<T: Scalar> IbspApp for SsspApp<T> {
    type State = SsspState<T>;
    type MergeState = ();
    type Output = BTreeMap<VertexId, SsspLabel<T>>;

    fn edge_attributes(&self) -> Vec<String> {
        vec![self.latency_attr.clone()]
    }

    fn compute(&self, ctx: &mut ComputeContext<'_, Self::State>) -> Result<(), AppError> {
        match self.mode {
            SsspMode::RunningMin => self.running_min(ctx)?,
            SsspMode::TimeBudget => self.time_budget(ctx)?,
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn output(&self, _: &SubgraphInstance, state: Self::State) -> Option<Self::Output> {
        Some(state.best.into_iter().collect())
    }
}
