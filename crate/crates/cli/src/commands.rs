use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use log::info;
use tempograph::apps::{assemble_track, check_vertex, LatencyHistogram, NHopApp, PageRankApp, SsspApp, TrackApp};
use tempograph::bench::{sweep, SweepConfig};
use tempograph::engine::{run as run_app, IbspApp, PatternMode, RunConfig, RunResult};
use tempograph::model::text::{read_collection, write_collection, INSTANCE_DIR};
use tempograph::model::{validate, Collection, ElementClass};
use tempograph::store::{deploy as deploy_store, Deployment, LayoutConfig};
use tempograph::synth::{bench_attributes, GenSpec, TopologyModel};

use crate::table::Table;
use crate::{
    App, BenchArgs, DeployArgs, Env, GenerateArgs, IngestArgs, InvalidData, Pattern, RunArgs, Topology, UsageError,
};

fn grid_width(n: usize) -> usize {
    (1..=n).take_while(|w| w * w <= n).filter(|w| n.is_multiple_of(*w)).last().unwrap_or(1)
}

fn gen_spec(env: &Env, a: &GenerateArgs) -> Result<GenSpec> {
    if let Some(p) = &a.spec {
        let p = env.path(p);
        let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
        return serde_json::from_str(&text).map_err(|e| InvalidData(format!("{}: {e}", p.display())).into());
    }
    if a.bench {
        return Ok(GenSpec::bench(env.seed));
    }
    let topology = match a.topology {
        Topology::Path => TopologyModel::Path,
        Topology::Grid => TopologyModel::Grid { width: a.width.unwrap_or_else(|| grid_width(a.vertices)) },
        Topology::SmallWorld => {
            TopologyModel::SmallWorld { degree: a.degree, rewire: a.rewire, communities: a.communities }
        }
        Topology::Preferential => TopologyModel::PreferentialAttachment { m: a.m },
    };
    Ok(GenSpec {
        vertices: a.vertices,
        edges: a.edges,
        instances: a.instances,
        start: a.start,
        duration: a.duration,
        directed: a.directed,
        topology,
        attributes: bench_attributes(),
        seed: env.seed,
    })
}

fn summary(c: &Collection) -> Table {
    let mut t = Table::new(&["vertices", "edges", "instances", "vertex_attrs", "edge_attrs", "directed"]);
    t.push(vec![
        c.template.vertices().len().to_string(),
        c.template.edges().len().to_string(),
        c.instances.len().to_string(),
        c.template.schema(ElementClass::Vertex).len().to_string(),
        c.template.schema(ElementClass::Edge).len().to_string(),
        c.template.is_directed().to_string(),
    ]);
    t
}

pub fn generate(env: &Env, a: &GenerateArgs, seed: Option<u64>) -> Result<()> {
    let mut spec = gen_spec(env, a)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let c = spec.generate().map_err(|e| UsageError(e.to_string()))?;
    let violations = validate(&c);
    if let Some(v) = violations.first() {
        bail!("generated collection failed validation: {v}");
    }
    let out = env.path(&a.out);
    // stale instance files would be read back as part of the collection
    if let Ok(rd) = fs::read_dir(out.join(INSTANCE_DIR)) {
        for p in rd.filter_map(Result::ok).map(|e| e.path()) {
            if p.extension().is_some_and(|x| x == "tsi") {
                fs::remove_file(&p).with_context(|| format!("removing {}", p.display()))?;
            }
        }
    }
    write_collection(&c, &out).with_context(|| format!("writing {}", out.display()))?;
    info!("wrote {}", out.display());
    summary(&c).print(env.format)
}

pub fn ingest(env: &Env, a: &IngestArgs) -> Result<()> {
    let dir = env.path(&a.collection);
    let c = read_collection(&dir).with_context(|| format!("reading {}", dir.display()))?;
    let violations = validate(&c);
    if !violations.is_empty() {
        for v in violations.iter().take(a.max_violations) {
            eprintln!("{v}");
        }
        if violations.len() > a.max_violations {
            eprintln!("... {} more", violations.len() - a.max_violations);
        }
        return Err(InvalidData(format!("{} violation(s) in {}", violations.len(), dir.display())).into());
    }
    summary(&c).print(env.format)
}

pub fn deploy(env: &Env, a: &DeployArgs) -> Result<()> {
    let dir = env.path(&a.collection);
    let c = read_collection(&dir).with_context(|| format!("reading {}", dir.display()))?;
    let layout = LayoutConfig { bins_per_partition: a.bins, instances_per_slice: a.ipack, balance_metric: a.balance };
    let out = env.path(&a.out);
    let m = deploy_store(&c, a.hosts, &layout, &out, env.seed)?;
    let mut t = Table::new(&["host", "vertices", "subgraphs", "bins", "slices", "attribute_slices", "bytes"]);
    for h in &m.host_manifests {
        t.push(vec![
            h.host.to_string(),
            h.vertices.to_string(),
            h.subgraphs.to_string(),
            h.bins.to_string(),
            h.slices.len().to_string(),
            h.attribute_slices.to_string(),
            h.bytes.to_string(),
        ]);
    }
    t.print(env.format)?;
    info!("deployed {} instance(s) in {} window(s) to {}", m.instances, m.windows, out.display());
    Ok(())
}

fn default_pattern(app: App) -> Pattern {
    match app {
        App::Sssp | App::Track => Pattern::Sequential,
        App::Pagerank => Pattern::Independent,
        App::Nhop => Pattern::Eventual,
    }
}

fn source(d: &Deployment, v: Option<u64>, what: &str) -> Result<u64> {
    let v = v.ok_or_else(|| UsageError(format!("--source is required for {what}")))?;
    check_vertex(d, v).map_err(|e| UsageError(e.0))?;
    Ok(v)
}

fn execute<A: IbspApp>(app: &A, d: &Deployment, pattern: PatternMode, cfg: &RunConfig) -> Result<RunResult<A::Output>> {
    Ok(run_app(app, d, pattern, cfg)?)
}

pub fn run(env: &Env, a: &RunArgs) -> Result<()> {
    let root = env.path(&a.deployment);
    let d = Deployment::open(&root, a.cache)?;
    let pattern: PatternMode = a.pattern.unwrap_or(default_pattern(a.app)).into();
    if a.workers == 0 {
        return Err(UsageError("--workers must be at least 1".into()).into());
    }
    let cfg = RunConfig { workers_per_host: a.workers, time_range: a.start.zip(a.end), ..RunConfig::default() };
    let name = format!("{:?}", a.app).to_lowercase();
    let out = env.path(&a.out.clone().unwrap_or_else(|| PathBuf::from(format!("{name}.csv"))));
    let stats_path = env.path(&a.stats.clone().unwrap_or_else(|| PathBuf::from(format!("{name}-stats.csv"))));
    let t0 = Instant::now();

    let stats = match a.app {
        App::Sssp => {
            let src = source(&d, a.source, "sssp")?;
            let app = SsspApp::<f64>::new(src).with_mode(a.sssp_mode).with_latency_attr(&a.latency_attr);
            let r = execute(&app, &d, pattern, &cfg)?;
            let mut t = Table::new(&["vertex", "dist", "pred"]);
            let mut all = BTreeMap::new();
            for outs in r.last_timestep().into_iter().flat_map(|m| m.values()) {
                all.extend(outs.iter().map(|(v, l)| (*v, *l)));
            }
            for (v, l) in all {
                t.push(vec![v.to_string(), l.dist.to_string(), l.pred.map(|p| p.to_string()).unwrap_or_default()]);
            }
            t.save(&out)?;
            r.stats
        }
        App::Pagerank => {
            let app = PageRankApp::<f64>::new(&a.latency_attr, a.pr_iters);
            let r = execute(&app, &d, pattern, &cfg)?;
            let mut t = Table::new(&["timestep", "vertex", "rank"]);
            for (ts, outs) in &r.outputs {
                let ranks: BTreeMap<_, _> = outs.values().flatten().collect();
                for (v, rank) in ranks {
                    t.push(vec![ts.to_string(), v.to_string(), rank.to_string()]);
                }
            }
            t.save(&out)?;
            r.stats
        }
        App::Nhop => {
            let src = source(&d, a.source, "nhop")?;
            let app =
                NHopApp::<f64>::new(src, a.n_hops).map_err(|e| UsageError(e.0))?.with_latency_attr(&a.latency_attr);
            let r = execute(&app, &d, pattern, &cfg)?;
            let hist = if r.merged.is_empty() {
                // without Merge, fold the per-timestep histograms here
                let mut h = LatencyHistogram::default();
                for o in r.outputs.values().flat_map(|m| m.values()) {
                    h.merge(o);
                }
                h
            } else {
                r.merged.values().next().cloned().unwrap_or_default()
            };
            let mut t = Table::new(&["bucket", "lower", "upper", "count"]);
            for (i, c) in hist.counts.iter().enumerate() {
                let (lo, hi) = LatencyHistogram::bounds(i);
                t.push(vec![i.to_string(), lo.to_string(), hi.to_string(), c.to_string()]);
            }
            t.save(&out)?;
            r.stats
        }
        App::Track => {
            let src = source(&d, a.source, "track")?;
            let target =
                a.target_id.as_deref().ok_or_else(|| UsageError("--target-id is required for track".into()))?;
            let app = TrackApp::new(src, target).with_search_depth(a.search_depth).with_sighting_attr(&a.sighting_attr);
            let r = execute(&app, &d, pattern, &cfg)?;
            let mut t = Table::new(&["timestep", "vertex", "time"]);
            for (ts, s) in assemble_track(&r) {
                t.push(vec![ts.to_string(), s.vertex.to_string(), s.time.to_string()]);
            }
            t.save(&out)?;
            r.stats
        }
    };
    if let Some(dir) = stats_path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(&stats_path, stats.to_csv()).with_context(|| format!("writing {}", stats_path.display()))?;

    let mut t = Table::new(&["app", "pattern", "timesteps", "supersteps", "slices_read", "cache_hits", "wall_ms"]);
    t.push(vec![
        name,
        pattern.to_string(),
        stats.timesteps.len().to_string(),
        stats.timesteps.iter().map(|s| s.supersteps).sum::<usize>().to_string(),
        stats.total_slices_read().to_string(),
        stats.timesteps.iter().map(|s| s.cache_hits).sum::<u64>().to_string(),
        format!("{:.1}", t0.elapsed().as_secs_f64() * 1e3),
    ]);
    t.print(env.format)?;
    info!("results in {}, stats in {}", out.display(), stats_path.display());
    Ok(())
}

fn non_empty(name: &str, v: &[usize]) -> Result<()> {
    if v.is_empty() || v.contains(&0) {
        return Err(UsageError(format!("--{name} needs one or more positive values")).into());
    }
    Ok(())
}

pub fn bench_scan(env: &Env, a: &BenchArgs) -> Result<()> {
    non_empty("bins", &a.bins)?;
    non_empty("ipack", &a.ipack)?;
    if a.cache.is_empty() {
        return Err(UsageError("--cache needs one or more values".into()).into());
    }
    let c = match &a.collection {
        Some(p) => {
            let dir = env.path(p);
            read_collection(&dir).with_context(|| format!("reading {}", dir.display()))?
        }
        None => GenSpec::bench(env.seed).generate().map_err(|e| anyhow::anyhow!(e))?,
    };
    let config = SweepConfig {
        hosts: a.hosts,
        bins: a.bins.clone(),
        packing: a.ipack.clone(),
        caches: a.cache.clone(),
        seed: env.seed,
        order: a.order,
    };
    let work = env.path(&a.work);
    let out = env.path(&a.out);
    let points = sweep(&c, &config, &work)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut t = Table::new(&[
        "config",
        "bins",
        "instances_per_slice",
        "cache_slots",
        "subgraphs",
        "attribute_reads",
        "cache_hits",
        "open_reads",
        "read_ms",
    ]);
    for (p, report) in &points {
        let file: &Path = &out.join(format!("scan-{}.csv", p.label()));
        fs::write(file, report.to_csv()).with_context(|| format!("writing {}", file.display()))?;
        t.push(vec![
            p.label(),
            p.bins.to_string(),
            p.instances_per_slice.to_string(),
            p.cache_slots.to_string(),
            report.rows.len().to_string(),
            report.attribute_reads.to_string(),
            report.cache_hits.to_string(),
            report.open_reads.to_string(),
            format!("{:.1}", report.read_ms),
        ]);
    }
    t.save(&out.join("summary.csv"))?;
    t.print(env.format)
}
