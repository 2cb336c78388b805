//! Vertex-disjoint partitioning of a template and sub-graph discovery.

mod grow;
mod map_file;
mod subgraph;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Edge, GraphTemplate, VertexId};

pub use grow::{partition, partition_with, IMBALANCE_TOLERANCE};
pub use map_file::{
    decode_partition_map, encode_partition_map, read_partition_map, write_partition_map, PartitionMapEntry,
};
pub use subgraph::{
    find_subgraphs, resolve_remote_edges, OutEdge, RemoteEdge, RemoteTarget, SubgraphIndex, SubgraphTemplate,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionId(pub u32);

impl fmt::Display for PartitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Globally unique sub-graph id: the owning partition in the high 32 bits,
/// the component rank within the partition in the low 32 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubgraphId(pub u64);

impl SubgraphId {
    pub fn new(partition: PartitionId, local: u32) -> Self {
        SubgraphId(((partition.0 as u64) << 32) | local as u64)
    }

    pub fn partition(self) -> PartitionId {
        PartitionId((self.0 >> 32) as u32)
    }

    pub fn local(self) -> u32 {
        self.0 as u32
    }
}

impl fmt::Display for SubgraphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sg{}.{}", self.partition().0, self.local())
    }
}

/// One host's share of the template.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub id: PartitionId,
    /// Sorted ascending.
    pub vertices: Vec<VertexId>,
    pub local_edges: Vec<Edge>,
    /// Edges with exactly one endpoint in this partition. Directed edges are
    /// held by the source's partition only; undirected ones by both sides.
    pub remote_edges: Vec<Edge>,
}

#[derive(Debug, thiserror::Error)]
pub enum PartitionError {
    #[error("more partitions than vertices ({partitions} > {vertices})")]
    TooManyPartitions { partitions: usize, vertices: usize },
    #[error("partition count must be at least 1")]
    ZeroPartitions,
    #[error("orphan vertex {0}: remote endpoint owned by no sub-graph")]
    OrphanVertex(VertexId),
    #[error("edge {edge} references unknown vertex {vertex}")]
    UnknownVertex { edge: u64, vertex: VertexId },
    #[error("corrupt partition map: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Partitions, their sub-graphs with resolved remote edges, and the owner map.
#[derive(Clone, Debug)]
pub struct Topology {
    pub partitions: Vec<Partition>,
    pub subgraphs: Vec<SubgraphTemplate>,
    owner: HashMap<VertexId, SubgraphId>,
}

impl Topology {
    pub fn build(template: &GraphTemplate, n: usize, seed: u64) -> Result<Self, PartitionError> {
        let partitions = partition(template, n, seed)?;
        let mut subgraphs: Vec<SubgraphTemplate> = partitions.iter().flat_map(find_subgraphs).collect();
        resolve_remote_edges(&mut subgraphs)?;
        let owner = subgraphs.iter().flat_map(|sg| sg.vertices.iter().map(move |v| (*v, sg.id))).collect();
        Ok(Self { partitions, subgraphs, owner })
    }

    pub fn owner(&self, v: VertexId) -> Option<SubgraphId> {
        self.owner.get(&v).copied()
    }

    pub fn subgraphs_of(&self, p: PartitionId) -> impl Iterator<Item = &SubgraphTemplate> {
        self.subgraphs.iter().filter(move |sg| sg.partition == p)
    }

    /// `vid → (partition, subgraph)` rows sorted by vertex id.
    pub fn map_entries(&self) -> Vec<PartitionMapEntry> {
        let mut rows: Vec<_> = self
            .owner
            .iter()
            .map(|(v, sg)| PartitionMapEntry { vertex: *v, partition: sg.partition(), subgraph: *sg })
            .collect();
        rows.sort_by_key(|r| r.vertex);
        rows
    }
}
