//! Latency histogram of the vertices within N hops of a source, per
//! instance, folded into one composite by Merge.
//!
//! A vertex is labelled with its hop count and the least latency among its
//! fewest-hop paths. Each superstep sends Merge the bucket-count changes it
//! caused, so the composite is a plain sum that arrives in any order.

use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::marker::PhantomData;

use super::codec::{decode, encode};
use super::histogram::{bucket_of, LatencyHistogram, BUCKETS};
use super::{edge_weight, MinEntry, DEFAULT_LATENCY_ATTR};
use crate::engine::{AppError, ComputeContext, IbspApp, MergeContext};
use crate::model::VertexId;
use crate::num::Scalar;
use crate::partition::{SubgraphId, SubgraphTemplate};
use crate::store::SubgraphInstance;

pub const DEFAULT_HOPS: u32 = 6;

pub struct NHopApp<T> {
    pub source: VertexId,
    pub hops: u32,
    pub latency_attr: String,
    _scalar: PhantomData<fn() -> T>,
}

impl<T: Scalar> NHopApp<T> {
    pub fn new(source: VertexId, hops: u32) -> Result<Self, AppError> {
        if hops < 1 {
            return Err(AppError("the hop limit must be at least 1".into()));
        }
        Ok(Self { source, hops, latency_attr: DEFAULT_LATENCY_ATTR.into(), _scalar: PhantomData })
    }

    pub fn with_latency_attr(mut self, name: &str) -> Self {
        self.latency_attr = name.into();
        self
    }
}

pub struct NHopState<T> {
    label: HashMap<VertexId, (u32, T)>,
    hist: LatencyHistogram,
}

impl<T> Default for NHopState<T> {
    fn default() -> Self {
        Self { label: HashMap::new(), hist: LatencyHistogram::default() }
    }
}

#[derive(Debug, Default)]
pub struct NHopMerge {
    counts: [i64; BUCKETS],
    root: bool,
}

fn encode_delta(delta: &[i64; BUCKETS]) -> Vec<u8> {
    delta.iter().flat_map(|d| d.to_le_bytes()).collect()
}

fn decode_delta(payload: &[u8]) -> Result<[i64; BUCKETS], AppError> {
    if payload.len() != 8 * BUCKETS {
        return Err(AppError("malformed histogram delta".into()));
    }
    let mut out = [0; BUCKETS];
    for (i, c) in payload.chunks_exact(8).enumerate() {
        out[i] = i64::from_le_bytes(c.try_into().unwrap());
    }
    Ok(out)
}

fn better<T: Scalar>(a: (u32, T), b: Option<&(u32, T)>) -> bool {
    b.is_none_or(|&(h, l)| a.0 < h || (a.0 == h && a.1 < l))
}

impl<T: Scalar> IbspApp for NHopApp<T> {
    type State = NHopState<T>;
    type MergeState = NHopMerge;
    type Output = LatencyHistogram;

    fn edge_attributes(&self) -> Vec<String> {
        vec![self.latency_attr.clone()]
    }

    fn compute(&self, ctx: &mut ComputeContext<'_, Self::State>) -> Result<(), AppError> {
        // label of each changed vertex before this superstep
        let mut before: HashMap<VertexId, Option<(u32, T)>> = HashMap::new();
        let mut heap = BinaryHeap::new();
        let owns = |ctx: &ComputeContext<'_, Self::State>, v| -> Result<bool, AppError> {
            Ok(ctx.index.position(v).is_some() && ctx.instance.vertex_exists(v)?)
        };
        if ctx.superstep == 1 {
            if owns(ctx, self.source)? {
                ctx.state.label.insert(self.source, (0, T::zero()));
                heap.push(MinEntry((0, T::zero()), self.source));
                before.insert(self.source, None);
            }
        } else {
            for m in ctx.messages {
                for (v, h, l) in decode(&m.payload, |r| Ok((r.u64()?, r.u32()?, r.f64()?)))? {
                    let lab = (h, T::from_attr(l));
                    if h > self.hops || !owns(ctx, v)? || !better(lab, ctx.state.label.get(&v)) {
                        continue;
                    }
                    let old = ctx.state.label.insert(v, lab);
                    before.entry(v).or_insert(old);
                    heap.push(MinEntry(lab, v));
                }
            }
        }
        let mut remote: BTreeMap<SubgraphId, BTreeMap<VertexId, (u32, T)>> = BTreeMap::new();
        while let Some(MinEntry(lab, u)) = heap.pop() {
            if ctx.state.label.get(&u) != Some(&lab) || lab.0 >= self.hops {
                continue;
            }
            for oe in ctx.index.out_edges(u) {
                let Some(w) = edge_weight::<T>(ctx.instance, oe.edge, &self.latency_attr)? else {
                    continue;
                };
                let next = (lab.0 + 1, lab.1 + w);
                if let Some(sg) = oe.remote {
                    let slot = remote.entry(sg).or_default();
                    if better(next, slot.get(&oe.to)) {
                        slot.insert(oe.to, next);
                    }
                } else if better(next, ctx.state.label.get(&oe.to)) {
                    let old = ctx.state.label.insert(oe.to, next);
                    before.entry(oe.to).or_insert(old);
                    heap.push(MinEntry(next, oe.to));
                }
            }
        }
        for (sg, items) in remote {
            let items: Vec<_> = items.into_iter().collect();
            ctx.send_to_subgraph(
                sg,
                encode(&items, |w, (v, (h, l))| {
                    w.u64(*v);
                    w.u32(*h);
                    w.f64(l.to_wire());
                }),
            )?;
        }

        let mut delta = [0i64; BUCKETS];
        for (v, old) in before {
            if let Some((h, l)) = old {
                if h >= 1 {
                    delta[bucket_of(l.to_wire())] -= 1;
                }
            }
            let (h, l) = ctx.state.label[&v];
            if h >= 1 {
                delta[bucket_of(l.to_wire())] += 1;
            }
        }
        for (c, d) in ctx.state.hist.counts.iter_mut().zip(&delta) {
            *c = c.checked_add_signed(*d).ok_or("histogram count underflow")?;
        }
        if delta.iter().any(|d| *d != 0) {
            ctx.send_to_merge(encode_delta(&delta))?;
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn output(&self, _: &SubgraphInstance, state: Self::State) -> Option<Self::Output> {
        Some(state.hist)
    }

    fn supports_merge(&self) -> bool {
        true
    }

    /// Superstep 1 folds each sub-graph's deltas and forwards them to the root.
    fn merge(&self, ctx: &mut MergeContext<'_, Self::MergeState>) -> Result<(), AppError> {
        let mut sum = [0i64; BUCKETS];
        for m in ctx.messages {
            for (s, d) in sum.iter_mut().zip(decode_delta(&m.payload)?) {
                *s += d;
            }
        }
        if ctx.superstep == 1 {
            let root = ctx.root();
            ctx.send_to_subgraph(root, encode_delta(&sum))?;
        } else {
            ctx.state.root = true;
            for (c, s) in ctx.state.counts.iter_mut().zip(sum) {
                *c += s;
            }
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn merge_output(&self, _: &SubgraphTemplate, state: Self::MergeState) -> Option<Self::Output> {
        if !state.root {
            return None;
        }
        let mut counts = [0u64; BUCKETS];
        for (c, s) in counts.iter_mut().zip(state.counts) {
            *c = u64::try_from(s).ok()?;
        }
        Some(LatencyHistogram::from_counts(counts))
    }
}
