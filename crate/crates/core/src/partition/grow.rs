//! Seeded region-growing partitioner.
//!
//! 1. Seeds by farthest-point sampling on undirected BFS distance, starting
//!    from the vertex farthest from a randomly drawn one. Unreachable
//!    vertices count as infinitely far.
//! 2. Regions grow one vertex at a time, always extending a smallest
//!    region from its BFS frontier. A region whose frontier is exhausted
//!    takes the lowest-id unassigned vertex instead.
//! 3. A single boundary pass moves (or, when balance forbids a move, swaps
//!    with an adjacent vertex) any vertex whose relocation cuts fewer edges.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Partition, PartitionError, PartitionId};
use crate::model::GraphTemplate;

/// Allowed spread between the largest and smallest partition, as a fraction of |V|.
pub const IMBALANCE_TOLERANCE: f64 = 0.05;

const UNASSIGNED: u32 = u32::MAX;
const FAR: u32 = u32::MAX;

struct Adjacency {
    /// CSR over vertex indices; parallel edges and both directions included.
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Adjacency {
    fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

fn bfs(adj: &Adjacency, src: usize, dist: &mut [u32]) {
    dist.fill(FAR);
    dist[src] = 0;
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        for &w in adj.neighbors(u) {
            if dist[w as usize] == FAR {
                dist[w as usize] = dist[u] + 1;
                q.push_back(w as usize);
            }
        }
    }
}

fn argmax(dist: &[u32]) -> usize {
    // first index wins ties
    let mut best = 0;
    for (i, d) in dist.iter().enumerate() {
        if *d > dist[best] {
            best = i;
        }
    }
    best
}

fn pick_seeds(adj: &Adjacency, nv: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut dist = vec![0u32; nv];
    bfs(adj, rng.gen_range(0..nv), &mut dist);
    let first = argmax(&dist);
    let mut seeds = vec![first];
    let mut min_dist = vec![FAR; nv];
    let mut cur = first;
    while seeds.len() < n {
        bfs(adj, cur, &mut dist);
        for (m, d) in min_dist.iter_mut().zip(&dist) {
            *m = (*m).min(*d);
        }
        cur = argmax(&min_dist);
        debug_assert!(min_dist[cur] > 0);
        seeds.push(cur);
    }
    seeds
}

fn grow(adj: &Adjacency, nv: usize, seeds: &[usize]) -> Vec<u32> {
    let n = seeds.len();
    let mut part = vec![UNASSIGNED; nv];
    let mut sizes = vec![0usize; n];
    let mut frontier: Vec<VecDeque<u32>> = vec![VecDeque::new(); n];
    let mut next_free = 0usize;
    let mut assigned = 0usize;

    let take = |v: usize, p: usize, part: &mut Vec<u32>, frontier: &mut Vec<VecDeque<u32>>, sizes: &mut Vec<usize>| {
        part[v] = p as u32;
        sizes[p] += 1;
        frontier[p].extend(adj.neighbors(v).iter().copied());
    };
    for (p, &s) in seeds.iter().enumerate() {
        take(s, p, &mut part, &mut frontier, &mut sizes);
        assigned += 1;
    }
    while assigned < nv {
        let p = (0..n).min_by_key(|&p| (sizes[p], p)).unwrap();
        let mut pick = None;
        while let Some(w) = frontier[p].pop_front() {
            if part[w as usize] == UNASSIGNED {
                pick = Some(w as usize);
                break;
            }
        }
        let v = match pick {
            Some(v) => v,
            None => {
                while part[next_free] != UNASSIGNED {
                    next_free += 1;
                }
                next_free
            }
        };
        take(v, p, &mut part, &mut frontier, &mut sizes);
        assigned += 1;
    }
    part
}

fn refine(adj: &Adjacency, part: &mut [u32], n: usize, tolerance: usize) {
    let mut sizes = vec![0usize; n];
    for p in part.iter() {
        sizes[*p as usize] += 1;
    }
    let spread_ok = |sizes: &[usize]| sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= tolerance;
    let mut counts = vec![0i64; n];
    let count_links = |v: usize, part: &[u32], counts: &mut Vec<i64>| {
        counts.fill(0);
        for &w in adj.neighbors(v) {
            counts[part[w as usize] as usize] += 1;
        }
    };

    for u in 0..part.len() {
        let own = part[u] as usize;
        count_links(u, part, &mut counts);
        let Some((target, gain)) = (0..n)
            .filter(|&p| p != own && counts[p] > 0)
            .map(|p| (p, counts[p] - counts[own]))
            .max_by_key(|&(p, g)| (g, std::cmp::Reverse(p)))
        else {
            continue;
        };
        if gain <= 0 {
            continue;
        }
        sizes[own] -= 1;
        sizes[target] += 1;
        if spread_ok(&sizes) {
            part[u] = target as u32;
            continue;
        }
        sizes[own] += 1;
        sizes[target] -= 1;

        // swap with the best adjacent vertex on the target side
        let links_uv = |v: u32| adj.neighbors(u).iter().filter(|&&w| w == v).count() as i64;
        let mut best: Option<(i64, u32)> = None;
        let mut vc = vec![0i64; n];
        for &v in adj.neighbors(u) {
            if part[v as usize] as usize != target {
                continue;
            }
            count_links(v as usize, part, &mut vc);
            let g = gain + (vc[own] - vc[target]) - 2 * links_uv(v);
            if g > 0 && best.is_none_or(|(bg, bv)| (g, std::cmp::Reverse(v)) > (bg, std::cmp::Reverse(bv))) {
                best = Some((g, v));
            }
        }
        if let Some((_, v)) = best {
            part[u] = target as u32;
            part[v as usize] = own as u32;
        }
    }
}

/// Splits the template into `n` vertex-disjoint partitions.
pub fn partition(template: &GraphTemplate, n: usize, seed: u64) -> Result<Vec<Partition>, PartitionError> {
    partition_with(template, n, seed, IMBALANCE_TOLERANCE)
}

pub fn partition_with(
    template: &GraphTemplate,
    n: usize,
    seed: u64,
    imbalance: f64,
) -> Result<Vec<Partition>, PartitionError> {
    let nv = template.vertices().len();
    if n == 0 {
        return Err(PartitionError::ZeroPartitions);
    }
    if n > nv {
        return Err(PartitionError::TooManyPartitions { partitions: n, vertices: nv });
    }

    let mut ids: Vec<u64> = template.vertices().to_vec();
    ids.sort_unstable();
    ids.dedup();
    let index = |v: u64| ids.binary_search(&v).ok();
    let nv = ids.len();

    let mut degree = vec![0usize; nv + 1];
    let mut pairs = Vec::with_capacity(template.edges().len());
    for e in template.edges() {
        let (a, b) = match (index(e.src), index(e.dst)) {
            (Some(a), Some(b)) => (a, b),
            (None, _) => return Err(PartitionError::UnknownVertex { edge: e.id, vertex: e.src }),
            (_, None) => return Err(PartitionError::UnknownVertex { edge: e.id, vertex: e.dst }),
        };
        if a != b {
            degree[a] += 1;
            degree[b] += 1;
            pairs.push((a, b));
        }
    }
    let mut offsets = vec![0usize; nv + 1];
    for i in 0..nv {
        offsets[i + 1] = offsets[i] + degree[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; offsets[nv]];
    for (a, b) in pairs {
        targets[fill[a]] = b as u32;
        fill[a] += 1;
        targets[fill[b]] = a as u32;
        fill[b] += 1;
    }
    let adj = Adjacency { offsets, targets };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds = pick_seeds(&adj, nv, n, &mut rng);
    let mut part = grow(&adj, nv, &seeds);
    let tolerance = ((nv as f64) * imbalance).ceil() as usize;
    refine(&adj, &mut part, n, tolerance.max(1));

    let mut out: Vec<Partition> = (0..n)
        .map(|p| Partition {
            id: PartitionId(p as u32),
            vertices: Vec::new(),
            local_edges: Vec::new(),
            remote_edges: Vec::new(),
        })
        .collect();
    for (i, p) in part.iter().enumerate() {
        out[*p as usize].vertices.push(ids[i]);
    }
    for e in template.edges() {
        let ps = part[index(e.src).unwrap()] as usize;
        let pd = part[index(e.dst).unwrap()] as usize;
        if ps == pd {
            out[ps].local_edges.push(*e);
        } else {
            out[ps].remote_edges.push(*e);
            if !template.is_directed() {
                out[pd].remote_edges.push(*e);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Edge;

    fn undirected(nv: u64, edges: &[(u64, u64)]) -> GraphTemplate {
        GraphTemplate::new(
            false,
            (0..nv).collect(),
            edges.iter().enumerate().map(|(i, (a, b))| Edge::new(i as u64, *a, *b)).collect(),
            vec![],
            vec![],
        )
    }

    fn cut(parts: &[Partition], t: &GraphTemplate) -> usize {
        let owner: std::collections::HashMap<u64, u32> =
            parts.iter().flat_map(|p| p.vertices.iter().map(move |v| (*v, p.id.0))).collect();
        t.edges().iter().filter(|e| owner[&e.src] != owner[&e.dst]).count()
    }

    /// Minimum cut over all splits into two halves of equal size.
    fn brute_force_min_cut(t: &GraphTemplate) -> usize {
        let nv = t.vertices().len();
        (0u32..1 << nv)
            .filter(|m| m.count_ones() as usize == nv / 2)
            .map(|m| t.edges().iter().filter(|e| ((m >> e.src) & 1) != ((m >> e.dst) & 1)).count())
            .min()
            .unwrap()
    }

    #[test]
    fn path_splits_in_the_middle() {
        let t = undirected(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(brute_force_min_cut(&t), 1);
        for seed in 0..20 {
            let parts = partition(&t, 2, seed).unwrap();
            assert_eq!(cut(&parts, &t), 1, "seed {seed}");
            let mut halves: Vec<_> = parts.iter().map(|p| p.vertices.clone()).collect();
            halves.sort();
            assert_eq!(halves, vec![vec![0, 1], vec![2, 3]]);
        }
    }

    #[test]
    fn single_partition_has_no_remote_edges() {
        let t = undirected(5, &[(0, 1), (1, 2), (3, 4), (4, 0)]);
        let parts = partition(&t, 1, 7).unwrap();
        assert_eq!(parts.len(), 1);
        assert!(parts[0].remote_edges.is_empty());
        assert_eq!(parts[0].local_edges.len(), 4);
    }

    #[test]
    fn disjoint_triangles_are_separated() {
        let t = undirected(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        assert_eq!(brute_force_min_cut(&t), 0);
        for seed in 0..20 {
            let parts = partition(&t, 2, seed).unwrap();
            assert_eq!(cut(&parts, &t), 0, "seed {seed}");
        }
    }

    #[test]
    fn too_many_partitions() {
        let t = undirected(3, &[(0, 1)]);
        let err = partition(&t, 4, 0).unwrap_err();
        assert!(err.to_string().contains("more partitions than vertices"));
    }

    #[test]
    fn deterministic_for_seed() {
        let edges: Vec<(u64, u64)> = (0..40).map(|i| (i, (i * 7 + 3) % 40)).collect();
        let t = undirected(40, &edges);
        assert_eq!(partition(&t, 3, 11).unwrap(), partition(&t, 3, 11).unwrap());
    }
}
