//! PageRank of every instance on its own, over the edges active in it.
//!
//! Superstep 1 counts existing vertices and asks the owners of remote
//! endpoints whether they exist; superstep 2 answers; superstep 3 sets the
//! uniform start vector and every later superstep is one power iteration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::marker::PhantomData;

use super::codec::{decode, encode};
use super::DEFAULT_LATENCY_ATTR;
use crate::engine::{AppError, ComputeContext, IbspApp};
use crate::model::{ElementRef, VertexId};
use crate::num::Scalar;
use crate::partition::SubgraphId;
use crate::store::SubgraphInstance;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_ITERATIONS: usize = 30;

const N: &str = "pagerank.n";
const DANGLING: &str = "pagerank.dangling";

pub struct PageRankApp<T> {
    /// An edge is active when this attribute has at least one value.
    pub activity_attr: String,
    pub damping: T,
    pub iterations: usize,
    _scalar: PhantomData<fn() -> T>,
}

impl<T: Scalar> Default for PageRankApp<T> {
    fn default() -> Self {
        Self {
            activity_attr: DEFAULT_LATENCY_ATTR.into(),
            damping: T::from_attr(DEFAULT_DAMPING),
            iterations: DEFAULT_ITERATIONS,
            _scalar: PhantomData,
        }
    }
}

impl<T: Scalar> PageRankApp<T> {
    pub fn new(activity_attr: &str, iterations: usize) -> Self {
        Self { activity_attr: activity_attr.into(), iterations, ..Self::default() }
    }
}

pub struct PageRankState<T> {
    n: f64,
    /// Existing vertices, ascending.
    vertices: Vec<VertexId>,
    /// Active out-edges: target and, if remote, its sub-graph.
    out: HashMap<VertexId, Vec<(VertexId, Option<SubgraphId>)>>,
    /// Remote candidates awaiting the existence answer.
    pending: Vec<(VertexId, VertexId, SubgraphId)>,
    rank: HashMap<VertexId, T>,
    /// Local contributions for the next iteration.
    inflow: HashMap<VertexId, T>,
}

impl<T> Default for PageRankState<T> {
    fn default() -> Self {
        Self {
            n: 0.0,
            vertices: Vec::new(),
            out: HashMap::new(),
            pending: Vec::new(),
            rank: HashMap::new(),
            inflow: HashMap::new(),
        }
    }
}

fn encode_ids(ids: &[VertexId]) -> Vec<u8> {
    encode(ids, |w, v| w.u64(*v))
}

fn decode_ids(payload: &[u8]) -> Result<Vec<VertexId>, AppError> {
    decode(payload, |r| r.u64())
}

impl<T: Scalar> PageRankApp<T> {
    fn discover(&self, ctx: &mut ComputeContext<'_, PageRankState<T>>) -> Result<(), AppError> {
        let inst = ctx.instance;
        let mut queries: BTreeMap<SubgraphId, BTreeSet<VertexId>> = BTreeMap::new();
        for &u in &inst.template.vertices {
            if !inst.vertex_exists(u)? {
                continue;
            }
            ctx.state.vertices.push(u);
            let mut active = Vec::new();
            for oe in ctx.index.out_edges(u) {
                let e = ElementRef::Edge(oe.edge);
                if !inst.exists(e)? || inst.values(e, &self.activity_attr)?.is_empty() {
                    continue;
                }
                match oe.remote {
                    None => active.push((oe.to, None)),
                    Some(sg) => {
                        queries.entry(sg).or_default().insert(oe.to);
                        ctx.state.pending.push((u, oe.to, sg));
                    }
                }
            }
            ctx.state.out.insert(u, active);
        }
        ctx.aggregate(N, ctx.state.vertices.len() as f64);
        for (sg, ids) in queries {
            ctx.send_to_subgraph(sg, encode_ids(&ids.into_iter().collect::<Vec<_>>()))?;
        }
        Ok(())
    }

    fn answer(&self, ctx: &mut ComputeContext<'_, PageRankState<T>>) -> Result<(), AppError> {
        ctx.state.n = ctx.aggregated(N).unwrap_or(0.0);
        let msgs = ctx.messages;
        for m in msgs {
            let asker = m.sender().ok_or("unexpected input message")?;
            let mut yes = Vec::new();
            for v in decode_ids(&m.payload)? {
                if ctx.index.position(v).is_some() && ctx.instance.vertex_exists(v)? {
                    yes.push(v);
                }
            }
            ctx.send_to_subgraph(asker, encode_ids(&yes))?;
        }
        Ok(())
    }

    fn settle_remote(&self, ctx: &mut ComputeContext<'_, PageRankState<T>>) -> Result<(), AppError> {
        let mut existing: BTreeSet<(SubgraphId, VertexId)> = BTreeSet::new();
        for m in ctx.messages {
            let from = m.sender().ok_or("unexpected input message")?;
            existing.extend(decode_ids(&m.payload)?.into_iter().map(|v| (from, v)));
        }
        let st = &mut *ctx.state;
        for (u, v, sg) in std::mem::take(&mut st.pending) {
            if existing.contains(&(sg, v)) {
                st.out.get_mut(&u).expect("pending edges start at existing vertices").push((v, Some(sg)));
            }
        }
        Ok(())
    }

    /// Sends this iteration's shares and reports the dangling mass.
    fn emit(&self, ctx: &mut ComputeContext<'_, PageRankState<T>>) -> Result<(), AppError> {
        let st = &mut *ctx.state;
        st.inflow.clear();
        let mut remote: BTreeMap<SubgraphId, BTreeMap<VertexId, T>> = BTreeMap::new();
        let mut dangling = T::zero();
        for u in &st.vertices {
            let r = st.rank[u];
            let out = &st.out[u];
            if out.is_empty() {
                dangling = dangling + r;
                continue;
            }
            let share = r / T::from_usize(out.len()).unwrap();
            for &(v, sg) in out {
                let slot = match sg {
                    None => st.inflow.entry(v).or_insert_with(T::zero),
                    Some(sg) => remote.entry(sg).or_default().entry(v).or_insert_with(T::zero),
                };
                *slot = *slot + share;
            }
        }
        ctx.aggregate(DANGLING, dangling.to_wire());
        for (sg, shares) in remote {
            let items: Vec<_> = shares.into_iter().collect();
            ctx.send_to_subgraph(
                sg,
                encode(&items, |w, (v, s)| {
                    w.u64(*v);
                    w.f64(s.to_wire());
                }),
            )?;
        }
        Ok(())
    }

    fn iterate(&self, ctx: &mut ComputeContext<'_, PageRankState<T>>) -> Result<(), AppError> {
        let msgs = ctx.messages;
        for m in msgs {
            for (v, s) in decode(&m.payload, |r| Ok((r.u64()?, r.f64()?)))? {
                let slot = ctx.state.inflow.entry(v).or_insert_with(T::zero);
                *slot = *slot + T::from_attr(s);
            }
        }
        let n = T::from_attr(ctx.state.n);
        let dangling = T::from_attr(ctx.aggregated(DANGLING).unwrap_or(0.0));
        let d = self.damping;
        let base = (T::one() - d) / n + d * dangling / n;
        let st = &mut *ctx.state;
        for u in &st.vertices {
            let inflow = st.inflow.get(u).copied().unwrap_or_else(T::zero);
            st.rank.insert(*u, base + d * inflow);
        }
        Ok(())
    }
}

impl<T: Scalar> IbspApp for PageRankApp<T> {
    type State = PageRankState<T>;
    type MergeState = ();
    type Output = BTreeMap<VertexId, T>;

    fn edge_attributes(&self) -> Vec<String> {
        vec![self.activity_attr.clone()]
    }

    fn compute(&self, ctx: &mut ComputeContext<'_, Self::State>) -> Result<(), AppError> {
        match ctx.superstep {
            1 => self.discover(ctx)?,
            2 => self.answer(ctx)?,
            s => {
                if s == 3 {
                    self.settle_remote(ctx)?;
                    if ctx.state.n > 0.0 {
                        let r0 = T::one() / T::from_attr(ctx.state.n);
                        let st = &mut *ctx.state;
                        st.rank = st.vertices.iter().map(|v| (*v, r0)).collect();
                    }
                } else {
                    self.iterate(ctx)?;
                }
                if s - 3 >= self.iterations || ctx.state.n == 0.0 {
                    ctx.vote_to_halt();
                    return Ok(());
                }
                self.emit(ctx)?;
            }
        }
        Ok(())
    }

    fn output(&self, _: &SubgraphInstance, state: Self::State) -> Option<Self::Output> {
        Some(state.rank.into_iter().collect())
    }
}
