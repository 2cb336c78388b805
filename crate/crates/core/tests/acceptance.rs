//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use common::{deploy_tmp, layout, oracle, random_collection};
use tempograph::apps::{assemble_track, LatencyHistogram, NHopApp, PageRankApp, SsspApp, TrackApp};
use tempograph::bench::{full_scan, ScanOrder};
use tempograph::engine::{run, AppError, ComputeContext, IbspApp, Origin, PatternMode, Phase, RunConfig};
use tempograph::model::{AttributeSchema, Collection, Edge, GraphInstance, GraphTemplate, Value, ValueType};
use tempograph::partition::{find_subgraphs, partition, SubgraphId, Topology};
use tempograph::store::{deploy, Deployment, SliceCache};
use tempograph::synth::GenSpec;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn flatten<X: Clone>(m: &BTreeMap<SubgraphId, BTreeMap<u64, X>>) -> BTreeMap<u64, X> {
    m.values().flat_map(|x| x.iter().map(|(k, v)| (*k, v.clone()))).collect()
}

fn sssp_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut runs = 0;
    for seed in 0..24u64 {
        let vertices = 40 + (seed as usize * 37) % 261;
        let instances = 1 + seed as usize % 8;
        let c = random_collection(100 + seed, vertices, instances, seed % 3 != 0);
        let want = oracle::sssp_running_min(&c, 0, "latency");
        for hosts in [1, 2, 4] {
            let (_dir, d) = deploy_tmp(&c, hosts, 2, 1 + seed as usize % 3, 6, seed);
            let cfg = RunConfig { workers_per_host: 1 + seed as usize % 2, ..RunConfig::default() };
            let r = run(&SsspApp::<f64>::new(0), &d, PatternMode::SequentiallyDependent, &cfg)
                .map_err(|e| format!("seed {seed} hosts {hosts}: {e}"))?;
            check(r.outputs.len() == instances, || format!("seed {seed}: {} timesteps", r.outputs.len()))?;
            for (t, outs) in &r.outputs {
                let got: BTreeMap<u64, f64> = flatten(outs).into_iter().map(|(v, l)| (v, l.dist)).collect();
                check(got == want[t - 1], || format!("seed {seed} hosts {hosts} timestep {t}: distances differ"))?;
            }
            runs += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    check(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("24 collections x hosts {{1,2,4}} = {runs} runs exact, {secs:.1}s"))
}

fn pagerank_oracle() -> Outcome {
    let mut instances = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..6u64 {
        let c = random_collection(200 + seed, 60 + 25 * seed as usize, 4, seed % 2 == 0);
        let (_dir, d) = deploy_tmp(&c, 1 + seed as usize % 4, 2, 2, 8, seed);
        let cfg = RunConfig { workers_per_host: 2, ..RunConfig::default() };
        let r = run(&PageRankApp::<f64>::new("latency", 30), &d, PatternMode::Independent, &cfg)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        for (t, outs) in &r.outputs {
            let got = flatten(outs);
            let want = oracle::pagerank(&c, t - 1, "latency", 0.85, 30);
            check(got.keys().eq(want.keys()), || format!("seed {seed} t {t}: vertex sets differ"))?;
            let linf = got.iter().map(|(v, r)| (r - want[v]).abs()).fold(0.0, f64::max);
            worst = worst.max(linf);
            check(linf < 1e-8, || format!("seed {seed} t {t}: L-inf {linf:e}"))?;
            let sum: f64 = got.values().sum();
            check((sum - 1.0).abs() < 1e-6, || format!("seed {seed} t {t}: rank sum {sum}"))?;
            instances += 1;
        }
    }
    check(instances >= 20, || format!("only {instances} instances"))?;
    Ok(format!("{instances} instances, worst L-inf {worst:.2e}"))
}

fn nhop_oracle() -> Outcome {
    for seed in 0..20u64 {
        let c = random_collection(300 + seed, 50 + 12 * seed as usize, 2 + seed as usize % 4, seed % 2 == 1);
        let mut want = [0u64; 17];
        for pos in 0..c.instances.len() {
            for (w, x) in want.iter_mut().zip(oracle::nhop_histogram(&c, pos, 0, 6, "latency")) {
                *w += x;
            }
        }
        let (_dir, d) = deploy_tmp(&c, 1 + seed as usize % 4, 3, 2, 8, seed);
        let r = run(&NHopApp::<f64>::new(0, 6).unwrap(), &d, PatternMode::EventuallyDependent, &RunConfig::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let got: Vec<&LatencyHistogram> = r.merged.values().collect();
        check(got.len() == 1, || format!("seed {seed}: {} merge outputs", got.len()))?;
        check(got[0].counts == want, || format!("seed {seed}: {:?} != {:?}", got[0].counts, want))?;
    }
    Ok("20 collections, composite histograms bucket-exact".into())
}

/// Undirected `w` x `h` grid; sightings scripted per instance as (vertex, offset, plate).
fn road_grid(w: u64, h: u64, script: &[Vec<(u64, i64, &str)>]) -> Collection {
    let mut edges = Vec::new();
    for v in 0..w * h {
        if v % w + 1 < w {
            edges.push(Edge::new(edges.len() as u64, v, v + 1));
        }
        if v + w < w * h {
            edges.push(Edge::new(edges.len() as u64, v, v + w));
        }
    }
    let t = GraphTemplate::new(
        false,
        (0..w * h).collect(),
        edges,
        vec![AttributeSchema::normal("sighting", ValueType::String)],
        vec![],
    );
    let inst = script
        .iter()
        .enumerate()
        .map(|(k, seen)| {
            let start = 300 * k as i64;
            let mut b = GraphInstance::builder(start, start + 300);
            for &(v, off, plate) in seen {
                b.vertex(v, "sighting", Value::Str(format!("{plate}@{}", start + off)));
            }
            b.build()
        })
        .collect();
    Collection::new(t, inst)
}

fn track_case(
    name: &str,
    c: &Collection,
    start: u64,
    depth: u32,
    expect: Option<&[(usize, u64, i64)]>,
) -> Result<(), String> {
    for hosts in [1, 2, 3] {
        let (_dir, d) = deploy_tmp(c, hosts, 2, 1, 4, 7);
        let app = TrackApp::new(start, "CAR7").with_search_depth(depth);
        let r = run(&app, &d, PatternMode::SequentiallyDependent, &RunConfig::default())
            .map_err(|e| format!("{name}: {e}"))?;
        let got: Vec<_> = assemble_track(&r).into_iter().map(|(t, s)| (t, s.vertex, s.time)).collect();
        let owner = |v: u64| d.owner(v).unwrap().0;
        let want = oracle::track(c, &owner, start, "CAR7", depth);
        check(got == want, || format!("{name}, {hosts} hosts: {got:?} != oracle {want:?}"))?;
        if let Some(e) = expect {
            check(want == e, || format!("{name}: oracle {want:?} != scripted {e:?}"))?;
        }
    }
    Ok(())
}

fn track_scenarios() -> Outcome {
    // stationary
    let c = road_grid(6, 6, &vec![vec![(14, 30, "CAR7"), (15, 40, "BUS2")]; 5]);
    let want: Vec<_> = (0..5).map(|k| (k + 1, 14, 300 * k as i64 + 30)).collect();
    track_case("stationary", &c, 14, 3, Some(&want))?;

    // one hop per instance along a snake through the grid
    let route = [0u64, 1, 2, 8, 14, 15, 21, 27, 28, 29];
    let script: Vec<_> = route.iter().map(|&v| vec![(v, 100, "CAR7"), (35 - v, 100, "CAR7X")]).collect();
    let c = road_grid(6, 6, &script);
    let want: Vec<_> = route.iter().enumerate().map(|(k, &v)| (k + 1, v, 300 * k as i64 + 100)).collect();
    track_case("one-hop-per-instance", &c, 0, 2, Some(&want))?;

    // vanishing target: seen three times, then gone, then reappearing out of reach
    let mut script: Vec<Vec<(u64, i64, &str)>> = vec![vec![(7, 5, "CAR7")], vec![(8, 5, "CAR7")], vec![(9, 5, "CAR7")]];
    script.extend([vec![], vec![(9, 5, "CAR7")]]);
    let c = road_grid(6, 6, &script);
    track_case("vanishing", &c, 7, 3, Some(&[(1, 7, 5), (2, 8, 305), (3, 9, 605)]))?;

    // latest sighting wins: instance 2 sees the car at 13 (late) and 1 (early);
    // instance 3 has sightings near both, reachable only from 13
    let script =
        vec![vec![(0, 10, "CAR7")], vec![(1, 20, "CAR7"), (13, 250, "CAR7")], vec![(25, 5, "CAR7"), (3, 200, "OTHER")]];
    let c = road_grid(6, 6, &script);
    track_case("max-timestamp", &c, 0, 2, Some(&[(1, 0, 10), (2, 13, 550), (3, 25, 605)]))?;

    // random walks with decoys on the grid, checked against the oracle only
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..12 {
        let mut at = rng.gen_range(0..64u64);
        let start = at;
        let mut script = Vec::new();
        for _ in 0..8 {
            let mut seen = vec![(at, rng.gen_range(0..300i64), "CAR7")];
            for _ in 0..rng.gen_range(0..3) {
                let decoy = rng.gen_range(0..64u64);
                seen.push((decoy, rng.gen_range(0..300i64), if rng.gen_bool(0.5) { "CAR7" } else { "VAN1" }));
            }
            script.push(if rng.gen_bool(0.1) { vec![] } else { seen });
            let moves = [
                at.checked_sub(8),
                (at + 8 < 64).then_some(at + 8),
                (at % 8 > 0).then(|| at - 1),
                (at % 8 < 7).then_some(at + 1),
            ];
            if let Some(next) = moves[rng.gen_range(0..4)] {
                at = next;
            }
        }
        let c = road_grid(8, 8, &script);
        track_case(&format!("random walk {k}"), &c, start, 1 + k % 3, None)?;
    }
    Ok("stationary, one-hop, vanishing, max-timestamp and 12 random walks match on 1/2/3 hosts".into())
}

/// Attribute slices stored per host by the manifest: the non-constant attributes.
fn stored_attrs(d: &Deployment) -> u64 {
    (d.manifest.vertex_attributes.len() + d.manifest.edge_attributes.len()) as u64
}

struct Bench {
    collection: Collection,
    dir: TempDir,
}

impl Bench {
    fn new() -> Self {
        Self { collection: GenSpec::bench(1).generate().expect("bench collection"), dir: TempDir::new().unwrap() }
    }

    /// Deployment for `s<bins>-i<ipack>`, written on first use.
    fn open(&self, bins: usize, ipack: usize, cache: usize) -> Deployment {
        let path = self.dir.path().join(format!("s{bins}-i{ipack}"));
        if !path.exists() {
            deploy(&self.collection, 4, &layout(bins, ipack), &path, 1).expect("deploy bench");
        }
        Deployment::open(&path, cache).expect("open bench")
    }

    fn reads(&self, bins: usize, ipack: usize, cache: usize) -> Result<u64, String> {
        let d = self.open(bins, ipack, cache);
        full_scan(&d, ScanOrder::BinTime).map(|r| r.attribute_reads).map_err(|e| e.to_string())
    }
}

fn read_minimality(b: &Bench) -> Outcome {
    let n = b.collection.instances.len() as u64;
    let mut parts = Vec::new();
    for bins in [4usize, 8] {
        for ipack in [1usize, 5] {
            let probe = b.open(bins, ipack, 0);
            let attrs = stored_attrs(&probe);
            let d = b.open(bins, ipack, attrs as usize * bins);
            let got = full_scan(&d, ScanOrder::BinTime).map_err(|e| e.to_string())?.attribute_reads;
            let mut want = 0;
            for h in &d.manifest.host_manifests {
                let eff_bins = bins.min(h.subgraphs) as u64;
                want += attrs * eff_bins * n.div_ceil(ipack as u64);
            }
            check(got == want, || format!("s{bins} i{ipack}: {got} reads, formula {want}"))?;
            parts.push(format!("s{bins}-i{ipack}={got}"));
        }
    }
    Ok(format!("reads equal attrs x bins x windows: {}", parts.join(" ")))
}

fn caching_necessity(b: &Bench) -> Outcome {
    let mut parts = Vec::new();
    for bins in [4usize, 8] {
        let c0 = b.reads(bins, 5, 0)?;
        let c14 = b.reads(bins, 5, 14)?;
        check(c0 >= 3 * c14, || format!("s{bins} i5: c0 {c0} < 3 x c14 {c14}"))?;
        parts.push(format!("s{bins}: c0 {c0} / c14 {c14} = {:.1}x", c0 as f64 / c14 as f64));
    }
    Ok(parts.join(", "))
}

fn temporal_packing(b: &Bench) -> Outcome {
    let mut parts = Vec::new();
    for bins in [4usize, 8] {
        let i1 = b.reads(bins, 1, 14)?;
        let i5 = b.reads(bins, 5, 14)?;
        check(4 * i5 <= i1, || format!("s{bins} c14: i5 {i5} > i1 {i1} / 4"))?;
        parts.push(format!("s{bins}: i1 {i1} / i5 {i5} = {:.2}x", i1 as f64 / i5 as f64));
    }
    Ok(parts.join(", "))
}

fn first_timestep_dominance(b: &Bench) -> Outcome {
    let mut parts = Vec::new();
    for ipack in [1usize, 5] {
        let d = b.open(4, ipack, 14);
        let r = run(&SsspApp::<f64>::new(0), &d, PatternMode::SequentiallyDependent, &RunConfig::default())
            .map_err(|e| e.to_string())?;
        let reads: Vec<u64> = r.stats.timesteps.iter().map(|t| t.slices_read).collect();
        let rest = reads[1..].iter().copied().max().unwrap_or(0);
        check(reads[0] > rest, || format!("i{ipack}: timestep 1 read {} <= later max {rest}", reads[0]))?;
        parts.push(format!("i{ipack}: t1 {} vs later max {rest}", reads[0]));
    }
    Ok(parts.join(", "))
}

// ---- engine and partition properties ----

fn prop<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String> {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map(|_| cases).map_err(|e| e.to_string())
}

fn lru_trace(cap: usize, trace: Vec<u8>) -> Result<(), TestCaseError> {
    let cache: SliceCache<u8, u8> = SliceCache::new(cap);
    let mut recent: Vec<u8> = Vec::new(); // most recent first
    let (mut hits, mut misses, mut evictions) = (0, 0, 0);
    for k in trace {
        let (_, outcome) = cache.fetch::<()>(&k, || Ok((k, 1))).unwrap();
        let hit = match recent.iter().position(|&x| x == k) {
            Some(i) => {
                recent.remove(i);
                recent.insert(0, k);
                true
            }
            None => {
                if cap > 0 {
                    recent.insert(0, k);
                    if recent.len() > cap {
                        recent.pop();
                        evictions += 1;
                    }
                }
                false
            }
        };
        if hit {
            hits += 1;
        } else {
            misses += 1;
        }
        prop_assert_eq!(hit, outcome == tempograph::store::FetchOutcome::Hit);
    }
    prop_assert_eq!(cache.keys(), recent);
    let s = cache.stats();
    prop_assert_eq!((s.hits, s.misses, s.evictions, s.disk_reads), (hits, misses, evictions, misses));
    Ok(())
}

fn random_template() -> impl Strategy<Value = (GraphTemplate, usize, u64)> {
    (1usize..60, any::<bool>(), any::<u64>()).prop_flat_map(|(n, directed, seed)| {
        let edges = proptest::collection::vec((0..n, 0..n), 0..2 * n + 1);
        (edges, 1..=n.min(5)).prop_map(move |(pairs, hosts)| {
            let id = |i: usize| 3 * i as u64 + 1;
            let edges = pairs.iter().enumerate().map(|(k, &(s, d))| Edge::new(k as u64, id(s), id(d))).collect();
            (GraphTemplate::new(directed, (0..n).map(id).collect(), edges, vec![], vec![]), hosts, seed)
        })
    })
}

fn partition_cover((t, hosts, seed): (GraphTemplate, usize, u64)) -> Result<(), TestCaseError> {
    let parts = partition(&t, hosts, seed).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(parts.len(), hosts);
    let mut home = BTreeMap::new();
    for p in &parts {
        for &v in &p.vertices {
            prop_assert!(home.insert(v, p.id).is_none(), "vertex {} in two partitions", v);
        }
    }
    prop_assert_eq!(home.keys().copied().collect::<Vec<_>>(), {
        let mut v = t.vertices().to_vec();
        v.sort();
        v
    });
    let mut cut = 0;
    for e in t.edges() {
        let (a, b) = (home[&e.src], home[&e.dst]);
        cut += usize::from(a != b);
        for p in &parts {
            let local = p.local_edges.iter().filter(|x| x.id == e.id).count();
            let remote = p.remote_edges.iter().filter(|x| x.id == e.id).count();
            let (want_l, want_r) = match (a == p.id, b == p.id) {
                (true, true) => (1, 0),
                (true, false) => (0, 1),
                (false, true) => (0, usize::from(!t.is_directed())),
                (false, false) => (0, 0),
            };
            prop_assert_eq!((local, remote), (want_l, want_r), "edge {} in {}", e.id, p.id);
        }
    }
    let held: usize = parts.iter().map(|p| p.local_edges.len() + p.remote_edges.len()).sum();
    let copies = if t.is_directed() { 0 } else { cut };
    prop_assert_eq!(held, t.edges().len() + copies);
    Ok(())
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut x = x;
    while parent[x] != r {
        let next = parent[x];
        parent[x] = r;
        x = next;
    }
    r
}

fn components_match((t, hosts, seed): (GraphTemplate, usize, u64)) -> Result<(), TestCaseError> {
    let topo = Topology::build(&t, hosts, seed).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for p in &topo.partitions {
        let idx: BTreeMap<u64, usize> = p.vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut parent: Vec<usize> = (0..p.vertices.len()).collect();
        for e in &p.local_edges {
            let (a, b) = (find(&mut parent, idx[&e.src]), find(&mut parent, idx[&e.dst]));
            parent[a] = b;
        }
        let mut comps: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
        for (i, v) in p.vertices.iter().enumerate() {
            comps.entry(find(&mut parent, i)).or_default().insert(*v);
        }
        let want: BTreeSet<BTreeSet<u64>> = comps.into_values().collect();
        let sgs = find_subgraphs(p);
        let got: BTreeSet<BTreeSet<u64>> = sgs.iter().map(|s| s.vertices.iter().copied().collect()).collect();
        prop_assert_eq!(&got, &want);
        let via_topo: BTreeSet<BTreeSet<u64>> =
            topo.subgraphs_of(p.id).map(|s| s.vertices.iter().copied().collect()).collect();
        prop_assert_eq!(&via_topo, &want);
        let local: usize = sgs.iter().map(|s| s.local_edges.len()).sum();
        let remote: usize = sgs.iter().map(|s| s.remote_edges.len()).sum();
        prop_assert_eq!((local, remote), (p.local_edges.len(), p.remote_edges.len()));
        for s in topo.subgraphs_of(p.id) {
            for &v in &s.vertices {
                prop_assert_eq!(topo.owner(v), Some(s.id));
            }
        }
    }
    Ok(())
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Sends and halt vote of one invocation, a function of where it runs only.
fn plan(
    seed: u64,
    limit: usize,
    timestep: usize,
    sg: SubgraphId,
    superstep: usize,
    all: &[SubgraphId],
) -> (Vec<SubgraphId>, bool) {
    if superstep >= limit {
        return (Vec::new(), true);
    }
    let h = mix(seed ^ mix(timestep as u64) ^ mix(sg.0 << 7) ^ mix(superstep as u64 + 1000));
    let sends = (0..h % 4).map(|j| all[(mix(h + j) % all.len() as u64) as usize]).collect();
    (sends, (h >> 8).is_multiple_of(3))
}

/// Messages to random sub-graphs with random halt votes; logs what it receives.
struct Chatter {
    seed: u64,
    limit: usize,
}

impl IbspApp for Chatter {
    type State = Vec<(usize, u64, u32)>;
    type MergeState = ();
    type Output = Vec<(usize, u64, u32)>;

    fn compute(&self, ctx: &mut ComputeContext<'_, Self::State>) -> Result<(), AppError> {
        for m in ctx.messages {
            let seq = u32::from_le_bytes(m.payload[..4].try_into().unwrap());
            ctx.state.push((ctx.superstep, m.sender().map_or(u64::MAX, |s| s.0), seq));
        }
        let (sends, halt) =
            plan(self.seed, self.limit, ctx.timestep, ctx.subgraph(), ctx.superstep, ctx.all_subgraphs());
        for (j, to) in sends.into_iter().enumerate() {
            ctx.send_to_subgraph(to, (j as u32).to_le_bytes().to_vec())?;
        }
        if halt {
            ctx.vote_to_halt();
        }
        Ok(())
    }

    fn output(&self, _: &tempograph::store::SubgraphInstance, state: Self::State) -> Option<Self::Output> {
        Some(state)
    }
}

/// (superstep, sub-graph, halted before, sorted (sender, sender superstep, seq)).
type Event = (usize, SubgraphId, bool, Vec<(u64, usize, u32)>);

/// Reference BSP: everyone runs superstep 1; afterwards exactly the active
/// sub-graphs and those holding messages from the previous superstep run.
fn simulate(app: &Chatter, timestep: usize, all: &[SubgraphId]) -> Vec<Event> {
    let mut halted: BTreeMap<SubgraphId, bool> = all.iter().map(|s| (*s, false)).collect();
    let mut inbox: BTreeMap<SubgraphId, Vec<(u64, usize, u32)>> = BTreeMap::new();
    let mut events = Vec::new();
    for s in 1.. {
        let run: Vec<SubgraphId> =
            all.iter().copied().filter(|sg| s == 1 || !halted[sg] || inbox.contains_key(sg)).collect();
        if run.is_empty() {
            break;
        }
        let mut next: BTreeMap<SubgraphId, Vec<(u64, usize, u32)>> = BTreeMap::new();
        for sg in run {
            let mut got = inbox.remove(&sg).unwrap_or_default();
            got.sort();
            events.push((s, sg, halted[&sg], got));
            let (sends, halt) = plan(app.seed, app.limit, timestep, sg, s, all);
            for (j, to) in sends.into_iter().enumerate() {
                next.entry(to).or_default().push((sg.0, s, j as u32));
            }
            halted.insert(sg, halt);
        }
        inbox = next;
    }
    events
}

fn engine_trial(
    deps: &[(TempDir, Deployment)],
    (pick, seed, limit, wa, wb): (usize, u64, usize, usize, usize),
) -> Result<(), TestCaseError> {
    let d = &deps[pick % deps.len()].1;
    let app = Chatter { seed, limit };
    let all = d.subgraph_ids();
    let mut outputs = Vec::new();
    for workers in [wa, wb] {
        let cfg = RunConfig { workers_per_host: workers, trace: true, ..RunConfig::default() };
        let r = run(&app, d, PatternMode::Independent, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for (k, ts) in r.stats.timesteps.iter().enumerate() {
            let t = k + 1;
            let want = simulate(&app, t, &all);
            let mut got: Vec<Event> = Vec::new();
            for ev in r.trace.iter().filter(|e| e.phase == Phase::Timestep(t)) {
                let mut rec = Vec::new();
                for o in &ev.received {
                    match o {
                        Origin::Subgraph { id, phase, superstep } => {
                            // bulk synchrony: only the previous superstep of the same timestep
                            prop_assert_eq!(*phase, ev.phase);
                            prop_assert_eq!(*superstep + 1, ev.superstep);
                            rec.push((id.0, *superstep, 0));
                        }
                        Origin::Input => prop_assert!(false, "unexpected input message"),
                    }
                }
                // halt/wake: a halted sub-graph only runs when it has mail
                prop_assert!(!ev.was_halted || !ev.received.is_empty());
                got.push((ev.superstep, ev.subgraph, ev.was_halted, rec));
            }
            got.sort();
            let want: Vec<Event> = want
                .into_iter()
                .map(|(s, sg, h, rec)| (s, sg, h, rec.into_iter().map(|(a, b, _)| (a, b, 0)).collect()))
                .collect();
            prop_assert_eq!(&got, &want, "timestep {}", t);
            prop_assert_eq!(ts.supersteps, want.last().map_or(0, |e| e.0));
        }
        // delivery order: by sender, then send order
        for outs in r.outputs.values() {
            for log in outs.values() {
                let mut sorted = log.clone();
                sorted.sort();
                prop_assert_eq!(&sorted, log);
            }
        }
        outputs.push(r.outputs);
    }
    prop_assert_eq!(&outputs[0], &outputs[1], "workers {} vs {}", wa, wb);
    Ok(())
}

fn engine_invariants() -> Outcome {
    let t0 = Instant::now();
    let mut total = 0;
    total += prop(4000, (0usize..6, proptest::collection::vec(0u8..10, 0..80)), |(c, t)| lru_trace(c, t))
        .map_err(|e| format!("LRU trace: {e}"))?;
    total += prop(1500, random_template(), partition_cover).map_err(|e| format!("partition cover: {e}"))?;
    total += prop(1500, random_template(), components_match).map_err(|e| format!("components: {e}"))?;
    let deps: Vec<(TempDir, Deployment)> = (0..8u64)
        .map(|k| {
            let c = random_collection(500 + k, 20 + 6 * k as usize, 1 + k as usize % 3, k % 2 == 0);
            deploy_tmp(&c, 1 + k as usize % 4, 2, 1, 4, k)
        })
        .collect();
    let trial = (0usize..8, any::<u64>(), 1usize..7, 1usize..5, 1usize..5);
    total += prop(3000, trial, |x| engine_trial(&deps, x)).map_err(|e| format!("engine: {e}"))?;
    let took = t0.elapsed();
    check(took < Duration::from_secs(300), || format!("took {took:?}"))?;
    Ok(format!(
        "{total} trials (LRU 4000, partition cover 1500, components 1500, BSP/halt/determinism 3000), {:.1}s",
        took.as_secs_f64()
    ))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &dyn Fn() -> Outcome| {
        let t0 = Instant::now();
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match r {
            Ok(detail) => println!("PASS {n} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {n} {name}: {why}");
            }
        }
        log_time(name, t0);
    };
    report(1, "sssp-oracle", &sssp_oracle);
    report(2, "pagerank-oracle", &pagerank_oracle);
    report(3, "nhop-oracle", &nhop_oracle);
    report(4, "track-scenarios", &track_scenarios);
    let bench = Bench::new();
    report(5, "read-minimality", &|| read_minimality(&bench));
    report(6, "caching-necessity", &|| caching_necessity(&bench));
    report(7, "temporal-packing", &|| temporal_packing(&bench));
    report(8, "first-timestep-dominance", &|| first_timestep_dominance(&bench));
    report(9, "engine-invariants", &engine_invariants);
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

fn log_time(name: &str, t0: Instant) {
    if std::env::var_os("ACCEPTANCE_TIMING").is_some() {
        eprintln!("  {name} took {:.1}s", t0.elapsed().as_secs_f64());
    }
}
