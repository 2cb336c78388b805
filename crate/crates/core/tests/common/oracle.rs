//! Brute-force reference computations straight off a `Collection`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use tempograph::model::{AttrKind, Collection, ElementClass, Value};

fn resolved<'a>(c: &'a Collection, pos: usize, class: ElementClass, attr: &str, id: u64) -> Vec<&'a Value> {
    let decl = c.template.schema(class).iter().find(|a| a.name == attr);
    match decl.map(|d| &d.kind) {
        None => Vec::new(),
        Some(AttrKind::Constant(v)) => vec![v],
        Some(AttrKind::Default(v)) => match c.instances[pos].values(class, attr, id) {
            Some(vals) => vals.iter().collect(),
            None => vec![v],
        },
        Some(AttrKind::Normal) => {
            c.instances[pos].values(class, attr, id).map(|v| v.iter().collect()).unwrap_or_default()
        }
    }
}

pub fn flag(c: &Collection, pos: usize, class: ElementClass, id: u64) -> bool {
    match resolved(c, pos, class, "isExists", id).first() {
        Some(Value::Bool(b)) => *b,
        _ => true,
    }
}

pub fn edge_exists(c: &Collection, pos: usize, id: u64) -> bool {
    let e = c.template.edge(id).unwrap();
    flag(c, pos, ElementClass::Edge, id)
        && flag(c, pos, ElementClass::Vertex, e.src)
        && flag(c, pos, ElementClass::Vertex, e.dst)
}

/// Traversable arcs of one instance weighted by mean latency.
pub fn weighted_arcs(c: &Collection, pos: usize, attr: &str) -> Vec<(u64, u64, f64)> {
    let mut out = Vec::new();
    for e in c.template.edges() {
        if !edge_exists(c, pos, e.id) {
            continue;
        }
        let vals: Vec<f64> =
            resolved(c, pos, ElementClass::Edge, attr, e.id).iter().filter_map(|v| v.as_f64()).collect();
        if vals.is_empty() {
            continue;
        }
        let mut sum = 0.0;
        for v in &vals {
            sum += v;
        }
        let w = sum / vals.len() as f64;
        if w.is_nan() || w < 0.0 {
            continue;
        }
        out.push((e.src, e.dst, w));
        if !c.template.is_directed() && e.src != e.dst {
            out.push((e.dst, e.src, w));
        }
    }
    out
}

fn adjacency(arcs: &[(u64, u64, f64)]) -> BTreeMap<u64, Vec<(u64, f64)>> {
    let mut adj: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
    for &(u, v, w) in arcs {
        adj.entry(u).or_default().push((v, w));
    }
    adj
}

#[derive(PartialEq)]
struct Key(f64);
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

pub fn dijkstra(arcs: &[(u64, u64, f64)], source: u64) -> BTreeMap<u64, f64> {
    let adj = adjacency(arcs);
    let mut dist = BTreeMap::from([(source, 0.0)]);
    let mut heap = BinaryHeap::from([Reverse((Key(0.0), source))]);
    while let Some(Reverse((Key(d), u))) = heap.pop() {
        if d > dist[&u] {
            continue;
        }
        for &(v, w) in adj.get(&u).into_iter().flatten() {
            let nd = d + w;
            if dist.get(&v).is_none_or(|&cur| nd < cur) {
                dist.insert(v, nd);
                heap.push(Reverse((Key(nd), v)));
            }
        }
    }
    dist
}

/// Per-instance Dijkstra folded into a running element-wise minimum; one map per instance.
pub fn sssp_running_min(c: &Collection, source: u64, attr: &str) -> Vec<BTreeMap<u64, f64>> {
    let mut best: BTreeMap<u64, f64> = BTreeMap::new();
    let mut out = Vec::new();
    for pos in 0..c.instances.len() {
        if flag(c, pos, ElementClass::Vertex, source) {
            for (v, d) in dijkstra(&weighted_arcs(c, pos, attr), source) {
                let slot = best.entry(v).or_insert(d);
                if d < *slot {
                    *slot = d;
                }
            }
        }
        out.push(best.clone());
    }
    out
}

/// Departure-time dependent Dijkstra: an edge left at time `d` (relative to
/// the first instance start) uses the first instance ending after `d`.
pub fn sssp_time_budget(c: &Collection, source: u64, attr: &str) -> BTreeMap<u64, f64> {
    let origin = c.instances[0].start;
    let ends: Vec<f64> = c.instances.iter().map(|i| (i.end - origin) as f64).collect();
    let arcs: Vec<_> = (0..c.instances.len()).map(|p| adjacency(&weighted_arcs(c, p, attr))).collect();
    let mut dist = BTreeMap::new();
    if !flag(c, 0, ElementClass::Vertex, source) {
        return dist;
    }
    dist.insert(source, 0.0);
    let mut done = std::collections::BTreeSet::new();
    let mut heap = BinaryHeap::from([Reverse((Key(0.0), source))]);
    while let Some(Reverse((Key(d), u))) = heap.pop() {
        if d > dist[&u] || !done.insert(u) {
            continue;
        }
        let Some(k) = ends.iter().position(|&e| e > d) else { continue };
        for &(v, w) in arcs[k].get(&u).into_iter().flatten() {
            let nd = d + w;
            if dist.get(&v).is_none_or(|&cur| nd < cur) {
                dist.insert(v, nd);
                heap.push(Reverse((Key(nd), v)));
            }
        }
    }
    dist
}

/// Dense power iteration over the existing vertices and active edges.
pub fn pagerank(c: &Collection, pos: usize, activity: &str, damping: f64, iterations: usize) -> BTreeMap<u64, f64> {
    let verts: Vec<u64> =
        c.template.vertices().iter().copied().filter(|&v| flag(c, pos, ElementClass::Vertex, v)).collect();
    let n = verts.len();
    if n == 0 {
        return BTreeMap::new();
    }
    let idx: BTreeMap<u64, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut m = vec![vec![0.0; n]; n];
    let mut outdeg = vec![0usize; n];
    let mut arcs = Vec::new();
    for e in c.template.edges() {
        if !edge_exists(c, pos, e.id) || resolved(c, pos, ElementClass::Edge, activity, e.id).is_empty() {
            continue;
        }
        arcs.push((idx[&e.src], idx[&e.dst]));
        if !c.template.is_directed() && e.src != e.dst {
            arcs.push((idx[&e.dst], idx[&e.src]));
        }
    }
    for &(u, _) in &arcs {
        outdeg[u] += 1;
    }
    for &(u, v) in &arcs {
        m[v][u] += 1.0 / outdeg[u] as f64;
    }
    let nf = n as f64;
    let mut r = vec![1.0 / nf; n];
    for _ in 0..iterations {
        let dangling: f64 = (0..n).filter(|&u| outdeg[u] == 0).map(|u| r[u]).sum();
        r = (0..n)
            .map(|v| (1.0 - damping) / nf + damping * ((0..n).map(|u| m[v][u] * r[u]).sum::<f64>() + dangling / nf))
            .collect();
    }
    verts.into_iter().zip(r).collect()
}

pub fn bucket(x: f64) -> usize {
    if x < 1.0 {
        0
    } else {
        ((x.log2().floor() as usize) + 1).min(16)
    }
}

/// Histogram of min latency over fewest-hop paths, for vertices 1..=n hops away.
pub fn nhop_histogram(c: &Collection, pos: usize, source: u64, n: u32, attr: &str) -> [u64; 17] {
    let mut hist = [0u64; 17];
    if !flag(c, pos, ElementClass::Vertex, source) {
        return hist;
    }
    let adj = adjacency(&weighted_arcs(c, pos, attr));
    let mut hops = BTreeMap::from([(source, 0u32)]);
    let mut q = VecDeque::from([source]);
    let mut order = Vec::new();
    while let Some(u) = q.pop_front() {
        order.push(u);
        if hops[&u] == n {
            continue;
        }
        for &(v, _) in adj.get(&u).into_iter().flatten() {
            if !hops.contains_key(&v) {
                hops.insert(v, hops[&u] + 1);
                q.push_back(v);
            }
        }
    }
    let mut lat = BTreeMap::from([(source, 0.0f64)]);
    for u in order {
        let (hu, lu) = (hops[&u], lat[&u]);
        for &(v, w) in adj.get(&u).into_iter().flatten() {
            if hops.get(&v) == Some(&(hu + 1)) {
                let cand = lu + w;
                let slot = lat.entry(v).or_insert(cand);
                if cand < *slot {
                    *slot = cand;
                }
            }
        }
    }
    for (v, h) in hops {
        if h >= 1 {
            hist[bucket(lat[&v])] += 1;
        }
    }
    hist
}

fn sighting_times(c: &Collection, pos: usize, v: u64, attr: &str, target: &str) -> Vec<i64> {
    let start = c.instances[pos].start;
    resolved(c, pos, ElementClass::Vertex, attr, v)
        .iter()
        .filter_map(|val| match val {
            Value::Str(s) => match s.rsplit_once('@') {
                Some((id, t)) if id == target => t.parse().ok(),
                None if s == target => Some(start),
                _ => None,
            },
            _ => None,
        })
        .collect()
}

/// Sightings reachable in one instance. Walking an edge spends one unit of
/// budget; a sighting or a step into another sub-graph restores it in full.
fn track_search(
    c: &Collection,
    pos: usize,
    owner: &dyn Fn(u64) -> u64,
    roots: &[u64],
    target: &str,
    depth: u32,
) -> Vec<(u64, i64)> {
    let mut adj: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for e in c.template.edges() {
        if edge_exists(c, pos, e.id) {
            adj.entry(e.src).or_default().push(e.dst);
            if !c.template.is_directed() {
                adj.entry(e.dst).or_default().push(e.src);
            }
        }
    }
    let mut best: BTreeMap<u64, u32> = BTreeMap::new();
    let mut found = Vec::new();
    let mut work: Vec<(u64, u32)> =
        roots.iter().filter(|&&r| flag(c, pos, ElementClass::Vertex, r)).map(|&r| (r, depth)).collect();
    while let Some((v, b)) = work.pop() {
        let times = sighting_times(c, pos, v, "sighting", target);
        let left = if times.is_empty() { b } else { depth };
        if best.get(&v).is_some_and(|&x| x >= left) {
            continue;
        }
        if !best.contains_key(&v) {
            found.extend(times.iter().map(|&t| (v, t)));
        }
        best.insert(v, left);
        if left == 0 {
            continue;
        }
        for &u in adj.get(&v).into_iter().flatten() {
            work.push((u, if owner(u) == owner(v) { left - 1 } else { depth }));
        }
    }
    found
}

/// Track of `target` as (timestep, vertex, time): the latest sighting of each
/// instance. Each sub-graph hands its own latest sighting on as the next
/// instance's search root.
pub fn track(
    c: &Collection,
    owner: &dyn Fn(u64) -> u64,
    initial: u64,
    target: &str,
    depth: u32,
) -> Vec<(usize, u64, i64)> {
    let latest = |a: &(u64, i64), b: &(u64, i64)| (a.1, Reverse(a.0)).cmp(&(b.1, Reverse(b.0)));
    let mut roots = vec![initial];
    let mut out = Vec::new();
    for pos in 0..c.instances.len() {
        let found = track_search(c, pos, owner, &roots, target, depth);
        if let Some(&(v, t)) = found.iter().max_by(|a, b| latest(a, b)) {
            out.push((pos + 1, v, t));
        }
        let mut per: BTreeMap<u64, (u64, i64)> = BTreeMap::new();
        for s in found {
            let slot = per.entry(owner(s.0)).or_insert(s);
            if latest(&s, slot).is_gt() {
                *slot = s;
            }
        }
        roots = per.values().map(|s| s.0).collect();
    }
    out
}
