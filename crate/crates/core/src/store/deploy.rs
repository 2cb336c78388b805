use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::binpack::bin_pack;
use super::payload::{encode_attr_payload, InstanceInfo, MetadataIndex, PartitionTemplate, WindowInfo};
use super::slice::{write_slice, Slice, SliceHeader, SliceId, SliceKind};
use super::{LayoutConfig, StoreError, META_SLICE, TEMPLATE_SLICE};
use crate::model::{validate, Collection, EdgeId, ElementClass, Value, ValueType, VertexId};
use crate::partition::{write_partition_map, Partition, SubgraphId, SubgraphTemplate, Topology};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PARTITION_MAP_FILE: &str = "partition_map.bin";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceEntry {
    /// Relative to the deployment root, `/`-separated.
    pub path: String,
    pub kind: SliceKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub class: Option<ElementClass>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub attr: Option<String>,
    pub bin: u32,
    pub window: u32,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostManifest {
    pub host: usize,
    pub partition: u32,
    pub vertices: usize,
    pub subgraphs: usize,
    pub bins: usize,
    pub attribute_slices: usize,
    pub bytes: u64,
    pub slices: Vec<SliceEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeploymentManifest {
    pub seed: u64,
    pub hosts: usize,
    pub layout: LayoutConfig,
    pub directed: bool,
    pub instances: usize,
    pub windows: usize,
    pub time_start: i64,
    pub time_end: i64,
    /// Attributes stored in attribute slices (constants excluded).
    pub vertex_attributes: Vec<String>,
    pub edge_attributes: Vec<String>,
    pub host_manifests: Vec<HostManifest>,
}

impl DeploymentManifest {
    pub fn read(root: &Path) -> Result<Self, StoreError> {
        let path = root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => StoreError::CorruptDeployment(format!("missing {}", path.display())),
            _ => StoreError::io(&path, e),
        })?;
        serde_json::from_str(&text).map_err(|e| StoreError::CorruptDeployment(format!("{}: {e}", path.display())))
    }

    pub fn attribute_slices(&self) -> usize {
        self.host_manifests.iter().map(|h| h.attribute_slices).sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.host_manifests.iter().map(|h| h.bytes).sum()
    }

    /// Re-hashes every slice file against the recorded checksums.
    pub fn verify(&self, root: &Path) -> Result<(), StoreError> {
        for h in &self.host_manifests {
            for s in &h.slices {
                let path = root.join(&s.path);
                let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
                if bytes.len() as u64 != s.bytes || sha256_hex(&bytes) != s.sha256 {
                    return Err(StoreError::Checksum(path));
                }
            }
        }
        Ok(())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn check_name(class: ElementClass, name: &str) -> Result<(), StoreError> {
    let ok = !name.is_empty()
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(StoreError::Layout(format!("{class} attribute `{name}` is not usable as a file name")))
    }
}

fn windows_of(collection: &Collection, per: usize) -> Vec<WindowInfo> {
    let n = collection.instances.len();
    let firsts: Vec<usize> = (0..n).step_by(per).collect();
    firsts
        .iter()
        .enumerate()
        .map(|(w, &first)| {
            let count = per.min(n - first);
            let end = match firsts.get(w + 1) {
                Some(&next) => collection.instances[next].start,
                None => collection.instances[n - 1].end,
            };
            WindowInfo {
                window: w as u32,
                first: first as u32,
                count: count as u32,
                start: collection.instances[first].start,
                end,
            }
        })
        .collect()
}

struct HostPlan<'a> {
    host: usize,
    partition: &'a Partition,
    bins: Vec<Vec<Arc<SubgraphTemplate>>>,
    vertex_home: HashMap<VertexId, (usize, SubgraphId)>,
    edge_home: HashMap<EdgeId, (usize, SubgraphId)>,
}

impl<'a> HostPlan<'a> {
    fn new(host: usize, partition: &'a Partition, topo: &Topology, layout: &LayoutConfig) -> Self {
        let sgs: Vec<&SubgraphTemplate> = topo.subgraphs_of(partition.id).collect();
        let nbins = layout.bins_per_partition.min(sgs.len()).max(1);
        if nbins < layout.bins_per_partition {
            log::warn!(
                "partition {} has {} sub-graphs; using {} bins instead of {}",
                partition.id,
                sgs.len(),
                nbins,
                layout.bins_per_partition
            );
        }
        let by_id: HashMap<SubgraphId, &SubgraphTemplate> = sgs.iter().map(|sg| (sg.id, *sg)).collect();
        let assignment = bin_pack(&sgs, nbins, layout.balance_metric);
        let mut vertex_home = HashMap::new();
        let mut edge_home = HashMap::new();
        let mut bins = Vec::with_capacity(nbins);
        for (b, ids) in assignment.iter().enumerate() {
            let mut bin = Vec::with_capacity(ids.len());
            for id in ids {
                let sg = by_id[id];
                for v in &sg.vertices {
                    vertex_home.insert(*v, (b, sg.id));
                }
                for e in sg.edge_ids() {
                    edge_home.insert(e, (b, sg.id));
                }
                bin.push(Arc::new(sg.clone()));
            }
            bins.push(bin);
        }
        Self { host, partition, bins, vertex_home, edge_home }
    }

    fn home(&self, class: ElementClass) -> &HashMap<u64, (usize, SubgraphId)> {
        match class {
            ElementClass::Vertex => &self.vertex_home,
            ElementClass::Edge => &self.edge_home,
        }
    }
}

struct SliceWriter<'r> {
    root: &'r Path,
    entries: Vec<SliceEntry>,
}

impl SliceWriter<'_> {
    fn write(&mut self, rel: &Path, slice: Slice) -> Result<(), StoreError> {
        let bytes = write_slice(&slice, &self.root.join(rel))?;
        let h = &slice.header;
        self.entries.push(SliceEntry {
            path: rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"),
            kind: h.kind,
            class: h.class,
            attr: (h.kind == SliceKind::Attribute).then(|| h.attr.clone()),
            bin: h.bin,
            window: h.window,
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }
}

/// Partitions the template over `n_hosts` hosts and writes every slice below `root`.
///
/// An existing deployment at `root` is replaced; any other non-empty
/// directory is refused.
pub fn deploy(
    collection: &Collection,
    n_hosts: usize,
    layout: &LayoutConfig,
    root: &Path,
    seed: u64,
) -> Result<DeploymentManifest, StoreError> {
    if n_hosts == 0 {
        return Err(StoreError::Layout("at least one host is required".into()));
    }
    if layout.bins_per_partition == 0 || layout.instances_per_slice == 0 {
        return Err(StoreError::Layout("bins and instances per slice must be positive".into()));
    }
    let violations = validate(collection);
    if let Some(first) = violations.first() {
        return Err(StoreError::InvalidCollection(format!("{first} ({} violation(s))", violations.len())));
    }
    let template = &collection.template;
    let sliced: Vec<(ElementClass, String, ValueType)> = [ElementClass::Vertex, ElementClass::Edge]
        .into_iter()
        .flat_map(|c| {
            template.schema(c).iter().filter(|a| !a.kind.is_constant()).map(move |a| (c, a.name.clone(), a.value_type))
        })
        .collect();
    for (c, name, _) in &sliced {
        check_name(*c, name)?;
    }

    prepare_root(root)?;
    let topo = Topology::build(template, n_hosts, seed)?;
    let windows = windows_of(collection, layout.instances_per_slice);
    let instances: Vec<InstanceInfo> = collection
        .instances
        .iter()
        .enumerate()
        .map(|(i, g)| InstanceInfo { index: i as u32, start: g.start, end: g.end })
        .collect();
    let (time_start, time_end) = match (collection.instances.first(), collection.instances.last()) {
        (Some(a), Some(b)) => (a.start, b.end),
        _ => (0, 0),
    };

    let plans: Vec<HostPlan> =
        topo.partitions.iter().enumerate().map(|(k, p)| HostPlan::new(k, p, &topo, layout)).collect();
    let host_manifests = plans
        .par_iter()
        .map(|plan| write_host(collection, plan, &sliced, &windows, &instances, layout, root, (time_start, time_end)))
        .collect::<Result<Vec<_>, _>>()?;

    write_partition_map(&root.join(PARTITION_MAP_FILE), &topo.map_entries())?;
    let manifest = DeploymentManifest {
        seed,
        hosts: n_hosts,
        layout: *layout,
        directed: template.is_directed(),
        instances: collection.instances.len(),
        windows: windows.len(),
        time_start,
        time_end,
        vertex_attributes: sliced.iter().filter(|a| a.0 == ElementClass::Vertex).map(|a| a.1.clone()).collect(),
        edge_attributes: sliced.iter().filter(|a| a.0 == ElementClass::Edge).map(|a| a.1.clone()).collect(),
        host_manifests,
    };
    let path = root.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| StoreError::io(&path, e))?;
    Ok(manifest)
}

fn prepare_root(root: &Path) -> Result<(), StoreError> {
    if root.join(MANIFEST_FILE).exists() {
        for entry in fs::read_dir(root).map_err(|e| StoreError::io(root, e))? {
            let entry = entry.map_err(|e| StoreError::io(root, e))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if name.starts_with("host_") {
                fs::remove_dir_all(entry.path()).map_err(|e| StoreError::io(&entry.path(), e))?;
            } else if name == MANIFEST_FILE || name == PARTITION_MAP_FILE {
                fs::remove_file(entry.path()).map_err(|e| StoreError::io(&entry.path(), e))?;
            }
        }
    } else if root.exists() && fs::read_dir(root).map_err(|e| StoreError::io(root, e))?.next().is_some() {
        return Err(StoreError::Layout(format!("{} is not empty and holds no deployment", root.display())));
    }
    fs::create_dir_all(root).map_err(|e| StoreError::io(root, e))
}

#[allow(clippy::too_many_arguments)]
fn write_host(
    collection: &Collection,
    plan: &HostPlan,
    sliced: &[(ElementClass, String, ValueType)],
    windows: &[WindowInfo],
    instances: &[InstanceInfo],
    layout: &LayoutConfig,
    root: &Path,
    span: (i64, i64),
) -> Result<HostManifest, StoreError> {
    let template = &collection.template;
    let dir = PathBuf::from(format!("host_{}", plan.host));
    let mut out = SliceWriter { root, entries: Vec::new() };
    let pid = plan.partition.id;
    let header = |kind, class, bin: usize, window: u32, range: (i64, i64), attr: &str| SliceHeader {
        kind,
        class,
        partition: pid,
        bin: bin as u32,
        window,
        time_start: range.0,
        time_end: range.1,
        attr: attr.to_string(),
    };

    let ptemplate = PartitionTemplate {
        directed: template.is_directed(),
        vertex_schema: template.vertex_schema().to_vec(),
        edge_schema: template.edge_schema().to_vec(),
        bins: plan.bins.iter().enumerate().map(|(b, sgs)| (b as u32, sgs.clone())).collect(),
    };
    out.write(
        &dir.join(TEMPLATE_SLICE),
        Slice { header: header(SliceKind::Template, None, 0, 0, span, ""), payload: ptemplate.encode() },
    )?;

    let mut attributes = BTreeMap::new();
    for (class, name, ty) in sliced {
        let home = plan.home(*class);
        for w in windows {
            let range = w.first as usize..(w.first + w.count) as usize;
            type Entries<'v> = BTreeMap<SubgraphId, Vec<(u64, &'v [Value])>>;
            let mut per_bin: Vec<Vec<(u32, Entries)>> =
                vec![range.clone().map(|i| (i as u32, BTreeMap::new())).collect(); plan.bins.len()];
            for (slot, i) in range.enumerate() {
                if let Some(col) = collection.instances[i].column(*class, name) {
                    for (id, vals) in col.iter() {
                        if let Some(&(b, sg)) = home.get(&id) {
                            per_bin[b][slot].1.entry(sg).or_default().push((id, vals));
                        }
                    }
                }
            }
            for (b, window_data) in per_bin.iter().enumerate() {
                let id = SliceId { class: *class, attr: name.clone(), bin: b as u32, window: w.window };
                out.write(
                    &dir.join(id.rel_path()),
                    Slice {
                        header: header(SliceKind::Attribute, Some(*class), b, w.window, (w.start, w.end), name),
                        payload: encode_attr_payload(*ty, window_data),
                    },
                )?;
            }
        }
        let per_bin: BTreeMap<u32, Vec<u32>> =
            (0..plan.bins.len() as u32).map(|b| (b, windows.iter().map(|w| w.window).collect())).collect();
        attributes.insert((*class, name.clone()), (*ty, per_bin));
    }

    let meta = MetadataIndex {
        instances_per_slice: layout.instances_per_slice as u32,
        instances: instances.to_vec(),
        windows: windows.to_vec(),
        bins: plan.bins.iter().enumerate().map(|(b, sgs)| (b as u32, sgs.iter().map(|s| s.id).collect())).collect(),
        attributes,
    };
    out.write(
        &dir.join(META_SLICE),
        Slice { header: header(SliceKind::Metadata, None, 0, 0, span, ""), payload: meta.encode() },
    )?;

    let attribute_slices = out.entries.iter().filter(|e| e.kind == SliceKind::Attribute).count();
    Ok(HostManifest {
        host: plan.host,
        partition: pid.0,
        vertices: plan.partition.vertices.len(),
        subgraphs: plan.bins.iter().map(Vec::len).sum(),
        bins: plan.bins.len(),
        attribute_slices,
        bytes: out.entries.iter().map(|e| e.bytes).sum(),
        slices: out.entries,
    })
}
