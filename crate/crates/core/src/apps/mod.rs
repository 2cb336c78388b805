//! Reference applications, one per timestep pattern plus the path tracker.

mod codec;
pub mod histogram;
pub mod nhop;
pub mod pagerank;
pub mod sssp;
pub mod track;

use std::cmp::Ordering;

use crate::engine::AppError;
use crate::model::{EdgeId, ElementRef, VertexId};
use crate::num::{mean, Scalar};
use crate::store::{Deployment, SubgraphInstance};

pub use histogram::{bucket_of, LatencyHistogram, BUCKETS};
pub use nhop::{NHopApp, DEFAULT_HOPS};
pub use pagerank::{PageRankApp, DEFAULT_DAMPING, DEFAULT_ITERATIONS};
pub use sssp::{SsspApp, SsspLabel, SsspMode};
pub use track::{assemble_track, Sighting, TrackApp, DEFAULT_SEARCH_DEPTH};

pub const DEFAULT_LATENCY_ATTR: &str = "latency";

/// Weight of an edge in this instance: the mean of its latency values.
///
/// `None` when the edge does not exist, has no values, or the mean is
/// negative or not a number.
pub(crate) fn edge_weight<T: Scalar>(inst: &SubgraphInstance, edge: EdgeId, attr: &str) -> Result<Option<T>, AppError> {
    if !inst.exists(ElementRef::Edge(edge))? {
        return Ok(None);
    }
    let vals: Vec<T> = inst.f64_values(ElementRef::Edge(edge), attr)?.map(T::from_attr).collect();
    Ok(mean(vals.into_iter()).filter(|w| *w >= T::zero()))
}

/// Fails unless `v` is a template vertex of the deployment.
pub fn check_vertex(deployment: &Deployment, v: VertexId) -> Result<(), AppError> {
    match deployment.owner(v) {
        Some(_) => Ok(()),
        None => Err(AppError(format!("vertex {v} is not in the template"))),
    }
}

/// Min-heap entry: smallest key first, then smallest vertex.
#[derive(Clone, Copy, Debug)]
pub(crate) struct MinEntry<K>(pub K, pub VertexId);

impl<K: PartialOrd> PartialEq for MinEntry<K> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<K: PartialOrd> Eq for MinEntry<K> {}

impl<K: PartialOrd> PartialOrd for MinEntry<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K: PartialOrd> Ord for MinEntry<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(other.1.cmp(&self.1))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BinaryHeap;

    use super::*;

    #[test]
    fn heap_pops_smallest_key_then_vertex() {
        let mut h = BinaryHeap::new();
        for (k, v) in [(2.0, 1), (1.0, 9), (1.0, 3), (0.5, 7)] {
            h.push(MinEntry(k, v));
        }
        let order: Vec<u64> = std::iter::from_fn(|| h.pop().map(|e| e.1)).collect();
        assert_eq!(order, vec![7, 3, 9, 1]);
    }
}
