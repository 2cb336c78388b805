use std::collections::{HashMap, HashSet, VecDeque};

use super::{Partition, PartitionError, PartitionId, SubgraphId};
use crate::model::{Edge, EdgeId, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RemoteTarget {
    pub subgraph: SubgraphId,
    pub partition: PartitionId,
}

/// An edge leaving the sub-graph's partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RemoteEdge {
    pub edge: Edge,
    /// Endpoint inside this sub-graph.
    pub local: VertexId,
    /// Endpoint in another partition.
    pub remote: VertexId,
    /// Filled in by [`resolve_remote_edges`].
    pub target: Option<RemoteTarget>,
}

/// A maximal set of partition vertices connected through local edges.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgraphTemplate {
    pub id: SubgraphId,
    pub partition: PartitionId,
    /// Sorted ascending.
    pub vertices: Vec<VertexId>,
    pub local_edges: Vec<Edge>,
    pub remote_edges: Vec<RemoteEdge>,
}

impl SubgraphTemplate {
    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Local plus remote edges held by this sub-graph.
    pub fn edge_count(&self) -> usize {
        self.local_edges.len() + self.remote_edges.len()
    }

    /// Ids of every element whose values belong to this sub-graph.
    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.local_edges.iter().map(|e| e.id).chain(self.remote_edges.iter().map(|r| r.edge.id))
    }
}

/// Connected components of `(V_i, L_i)`, edge direction ignored.
///
/// Components are ranked by their smallest vertex id, which makes the ids
/// independent of vertex and edge enumeration order.
pub fn find_subgraphs(partition: &Partition) -> Vec<SubgraphTemplate> {
    let mut verts = partition.vertices.clone();
    verts.sort_unstable();
    verts.dedup();
    let pos: HashMap<VertexId, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for e in &partition.local_edges {
        if let (Some(&a), Some(&b)) = (pos.get(&e.src), pos.get(&e.dst)) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }

    let mut comp = vec![usize::MAX; verts.len()];
    let mut members: Vec<Vec<VertexId>> = Vec::new();
    for start in 0..verts.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let c = members.len();
        let mut group = Vec::new();
        comp[start] = c;
        let mut q = VecDeque::from([start]);
        while let Some(u) = q.pop_front() {
            group.push(verts[u]);
            for &w in &adj[u] {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    q.push_back(w);
                }
            }
        }
        group.sort_unstable();
        members.push(group);
    }

    let mut out: Vec<SubgraphTemplate> = members
        .into_iter()
        .enumerate()
        .map(|(i, vertices)| SubgraphTemplate {
            id: SubgraphId::new(partition.id, i as u32),
            partition: partition.id,
            vertices,
            local_edges: Vec::new(),
            remote_edges: Vec::new(),
        })
        .collect();
    for e in &partition.local_edges {
        if let Some(&a) = pos.get(&e.src) {
            out[comp[a]].local_edges.push(*e);
        }
    }
    for e in &partition.remote_edges {
        let (local, remote) = if pos.contains_key(&e.src) { (e.src, e.dst) } else { (e.dst, e.src) };
        if let Some(&a) = pos.get(&local) {
            out[comp[a]].remote_edges.push(RemoteEdge { edge: *e, local, remote, target: None });
        }
    }
    out
}

/// Annotates every remote edge with the sub-graph owning its far endpoint.
pub fn resolve_remote_edges(subgraphs: &mut [SubgraphTemplate]) -> Result<usize, PartitionError> {
    let owner: HashMap<VertexId, (SubgraphId, PartitionId)> =
        subgraphs.iter().flat_map(|sg| sg.vertices.iter().map(move |v| (*v, (sg.id, sg.partition)))).collect();
    let mut resolved = 0;
    for sg in subgraphs.iter_mut() {
        for r in &mut sg.remote_edges {
            let &(subgraph, partition) = owner.get(&r.remote).ok_or(PartitionError::OrphanVertex(r.remote))?;
            r.target = Some(RemoteTarget { subgraph, partition });
            resolved += 1;
        }
    }
    Ok(resolved)
}

/// A traversable edge out of a sub-graph vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutEdge {
    pub edge: EdgeId,
    pub to: VertexId,
    /// Owning sub-graph of `to` when it lies in another partition.
    pub remote: Option<SubgraphId>,
}

/// Adjacency view of a sub-graph template for traversal algorithms.
///
/// Directed templates expose out-edges only; undirected ones expose both
/// directions of every edge.
#[derive(Clone, Debug)]
pub struct SubgraphIndex {
    position: HashMap<VertexId, usize>,
    out: Vec<Vec<OutEdge>>,
    boundary: HashSet<VertexId>,
}

impl SubgraphIndex {
    pub fn new(sg: &SubgraphTemplate, directed: bool) -> Self {
        let position: HashMap<VertexId, usize> = sg.vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut out = vec![Vec::new(); sg.vertices.len()];
        for e in &sg.local_edges {
            out[position[&e.src]].push(OutEdge { edge: e.id, to: e.dst, remote: None });
            if !directed && e.src != e.dst {
                out[position[&e.dst]].push(OutEdge { edge: e.id, to: e.src, remote: None });
            }
        }
        let mut boundary = HashSet::new();
        for r in &sg.remote_edges {
            boundary.insert(r.local);
            out[position[&r.local]].push(OutEdge {
                edge: r.edge.id,
                to: r.remote,
                remote: r.target.map(|t| t.subgraph),
            });
        }
        Self { position, out, boundary }
    }

    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.position.get(&v).copied()
    }

    pub fn out_edges(&self, v: VertexId) -> &[OutEdge] {
        self.position.get(&v).map_or(&[], |&i| &self.out[i])
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary.contains(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(vertices: &[u64], local: &[(u64, u64, u64)], remote: &[(u64, u64, u64)]) -> Partition {
        Partition {
            id: PartitionId(1),
            vertices: vertices.to_vec(),
            local_edges: local.iter().map(|&(i, a, b)| Edge::new(i, a, b)).collect(),
            remote_edges: remote.iter().map(|&(i, a, b)| Edge::new(i, a, b)).collect(),
        }
    }

    #[test]
    fn isolated_vertex_is_own_component() {
        let sgs = find_subgraphs(&part(&[1, 2, 3], &[(0, 1, 2)], &[]));
        let sets: Vec<_> = sgs.iter().map(|s| s.vertices.clone()).collect();
        assert_eq!(sets, vec![vec![1, 2], vec![3]]);
        assert_eq!(sgs[0].id, SubgraphId::new(PartitionId(1), 0));
        assert_eq!(sgs[1].id.partition(), PartitionId(1));
    }

    #[test]
    fn connected_partition_is_one_subgraph() {
        let sgs = find_subgraphs(&part(&[1, 2, 3], &[(0, 1, 2), (1, 2, 3), (2, 3, 1)], &[]));
        assert_eq!(sgs.len(), 1);
        assert_eq!(sgs[0].local_edges.len(), 3);
    }

    #[test]
    fn direction_ignored_for_connectivity() {
        let sgs = find_subgraphs(&part(&[5, 6, 7], &[(0, 6, 5), (1, 7, 6)], &[]));
        assert_eq!(sgs.len(), 1);
    }

    #[test]
    fn ids_stable_under_enumeration_order() {
        let a = find_subgraphs(&part(&[4, 1, 3, 2], &[(0, 4, 3)], &[(9, 1, 50)]));
        let b = find_subgraphs(&part(&[1, 2, 3, 4], &[(0, 4, 3)], &[(9, 1, 50)]));
        let ids = |s: &[SubgraphTemplate]| s.iter().map(|x| (x.id, x.vertices.clone())).collect::<Vec<_>>();
        assert_eq!(ids(&a), ids(&b));
    }

    #[test]
    fn orphan_remote_vertex_is_an_error() {
        let mut sgs = find_subgraphs(&part(&[1, 2], &[], &[(0, 1, 99)]));
        assert!(matches!(resolve_remote_edges(&mut sgs), Err(PartitionError::OrphanVertex(99))));
    }
}
