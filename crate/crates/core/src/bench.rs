//! Full-scan storage benchmark over a deployment.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::model::Collection;
use crate::partition::SubgraphId;
use crate::store::{deploy, BalanceMetric, Deployment, FetchTally, LayoutConfig, StoreError};

/// Order in which a scan visits (sub-graph, instance) pairs on each host.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanOrder {
    /// Bin by bin; within a bin, instance by instance over its sub-graphs.
    #[default]
    BinTime,
    /// Sub-graph by sub-graph in bin-major order, every instance of one
    /// sub-graph before the next.
    Subgraph,
}

impl std::str::FromStr for ScanOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bin-time" => Ok(ScanOrder::BinTime),
            "subgraph" => Ok(ScanOrder::Subgraph),
            _ => Err(format!("unknown scan order `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub host: usize,
    pub subgraph: SubgraphId,
    pub bin: u32,
    pub vertices: usize,
    pub edges: usize,
    pub read_ms: f64,
    pub slices_read: u64,
    pub cache_hits: u64,
    pub bytes_read: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub bins: usize,
    pub instances_per_slice: usize,
    pub cache_slots: usize,
    /// Rows sorted largest sub-graph first.
    pub rows: Vec<ScanRow>,
    pub attribute_reads: u64,
    pub cache_hits: u64,
    /// Template and metadata slices read while opening the hosts.
    pub open_reads: u64,
    pub read_ms: f64,
}

pub const SCAN_CSV_HEADER: &str =
    "host,subgraph,bin,vertices,edges,read_ms,slices_read,cache_hits,bytes_read,cum_read_ms,cum_slices_read";

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{SCAN_CSV_HEADER}\n");
        let (mut ms, mut reads) = (0.0, 0);
        for r in &self.rows {
            ms += r.read_ms;
            reads += r.slices_read;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:.3},{},{},{},{:.3},{}",
                r.host,
                r.subgraph.0,
                r.bin,
                r.vertices,
                r.edges,
                r.read_ms,
                r.slices_read,
                r.cache_hits,
                r.bytes_read,
                ms,
                reads
            );
        }
        s
    }
}

/// Loads every instance of every sub-graph with all attributes projected.
pub fn full_scan(deployment: &Deployment, order: ScanOrder) -> Result<ScanReport, StoreError> {
    let mut rows = Vec::new();
    let mut open_reads = 0;
    for host in deployment.hosts() {
        let projection = host.full_projection();
        let n = host.instance_count();
        let c = host.counters();
        open_reads += c.template_reads + c.meta_reads;
        let sgs: Vec<_> = host.get_subgraphs().cloned().collect();
        let mut acc: Vec<(FetchTally, f64)> = vec![Default::default(); sgs.len()];
        let mut load = |i: usize, pos: usize| -> Result<(), StoreError> {
            let t = Instant::now();
            let (_, tally) = host.load_instance(sgs[i].id, pos, &projection)?;
            acc[i].0 += tally;
            acc[i].1 += t.elapsed().as_secs_f64() * 1e3;
            Ok(())
        };
        match order {
            ScanOrder::Subgraph => {
                for i in 0..sgs.len() {
                    for pos in 0..n {
                        load(i, pos)?;
                    }
                }
            }
            ScanOrder::BinTime => {
                let mut start = 0;
                while start < sgs.len() {
                    let bin = host.bin_of(sgs[start].id);
                    let end = start + sgs[start..].iter().take_while(|s| host.bin_of(s.id) == bin).count();
                    for pos in 0..n {
                        for i in start..end {
                            load(i, pos)?;
                        }
                    }
                    start = end;
                }
            }
        }
        for (sg, (tally, ms)) in sgs.iter().zip(acc) {
            rows.push(ScanRow {
                host: host.host(),
                subgraph: sg.id,
                bin: host.bin_of(sg.id).unwrap_or(0),
                vertices: sg.vertex_count(),
                edges: sg.edge_count(),
                read_ms: ms,
                slices_read: tally.disk_reads,
                cache_hits: tally.hits,
                bytes_read: tally.bytes,
            });
        }
    }
    rows.sort_by(|a, b| b.vertices.cmp(&a.vertices).then(b.edges.cmp(&a.edges)).then(a.subgraph.cmp(&b.subgraph)));
    let m = &deployment.manifest;
    Ok(ScanReport {
        bins: m.layout.bins_per_partition,
        instances_per_slice: m.layout.instances_per_slice,
        cache_slots: deployment.hosts().first().map_or(0, |h| h.cache().capacity()),
        attribute_reads: rows.iter().map(|r| r.slices_read).sum(),
        cache_hits: rows.iter().map(|r| r.cache_hits).sum(),
        read_ms: rows.iter().map(|r| r.read_ms).sum(),
        open_reads,
        rows,
    })
}

/// One point of a bins × packing × cache sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SweepPoint {
    pub bins: usize,
    pub instances_per_slice: usize,
    pub cache_slots: usize,
}

impl SweepPoint {
    pub fn label(&self) -> String {
        format!("s{}-i{}-c{}", self.bins, self.instances_per_slice, self.cache_slots)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepConfig {
    pub hosts: usize,
    pub bins: Vec<usize>,
    pub packing: Vec<usize>,
    pub caches: Vec<usize>,
    pub seed: u64,
    pub order: ScanOrder,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            hosts: 4,
            bins: vec![4, 8],
            packing: vec![1, 5],
            caches: vec![0, 14],
            seed: 1,
            order: ScanOrder::BinTime,
        }
    }
}

/// Deploys once per layout under `root/s<b>-i<i>` and scans once per cache size.
pub fn sweep(
    collection: &Collection,
    config: &SweepConfig,
    root: &Path,
) -> Result<Vec<(SweepPoint, ScanReport)>, StoreError> {
    let mut out = Vec::new();
    for &b in &config.bins {
        for &i in &config.packing {
            let layout =
                LayoutConfig { bins_per_partition: b, instances_per_slice: i, balance_metric: BalanceMetric::Vertices };
            let dir = root.join(format!("s{b}-i{i}"));
            deploy(collection, config.hosts, &layout, &dir, config.seed)?;
            for &c in &config.caches {
                let d = Deployment::open(&dir, c)?;
                let report = full_scan(&d, config.order)?;
                out.push((SweepPoint { bins: b, instances_per_slice: i, cache_slots: c }, report));
            }
        }
    }
    Ok(out)
}
