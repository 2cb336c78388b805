use std::collections::HashMap;
use std::ops::{AddAssign, Range};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::cache::{CacheStats, FetchOutcome, SliceCache};
use super::deploy::{DeploymentManifest, PARTITION_MAP_FILE};
use super::payload::{decode_attr_payload, AttrSliceData, MetadataIndex, PartitionTemplate};
use super::slice::{read_slice, Slice, SliceId, SliceKind};
use super::{host_dir, StoreError, META_SLICE, TEMPLATE_SLICE};
use crate::model::{
    exists_flag, resolve_decl, AttrKind, AttributeSchema, ElementClass, ElementRef, Value, ValueSource, VertexId,
    IS_EXISTS,
};
use crate::partition::{read_partition_map, PartitionId, SubgraphId, SubgraphTemplate};

/// Slice activity attributable to one operation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FetchTally {
    pub disk_reads: u64,
    pub hits: u64,
    pub bytes: u64,
}

impl FetchTally {
    fn record(&mut self, outcome: FetchOutcome) {
        match outcome {
            FetchOutcome::Hit => self.hits += 1,
            FetchOutcome::Miss(b) => {
                self.disk_reads += 1;
                self.bytes += b;
            }
        }
    }
}

impl AddAssign for FetchTally {
    fn add_assign(&mut self, rhs: Self) {
        self.disk_reads += rhs.disk_reads;
        self.hits += rhs.hits;
        self.bytes += rhs.bytes;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StoreCounters {
    /// Attribute slice traffic.
    pub cache: CacheStats,
    /// Template and metadata slices read when the host was opened.
    pub template_reads: u64,
    pub meta_reads: u64,
    pub open_bytes: u64,
}

impl StoreCounters {
    /// Every slice read from disk, of any kind.
    pub fn slices_read(&self) -> u64 {
        self.cache.disk_reads + self.template_reads + self.meta_reads
    }
}

impl AddAssign for StoreCounters {
    fn add_assign(&mut self, r: Self) {
        self.cache.hits += r.cache.hits;
        self.cache.misses += r.cache.misses;
        self.cache.evictions += r.cache.evictions;
        self.cache.disk_reads += r.cache.disk_reads;
        self.cache.bytes_read += r.cache.bytes_read;
        self.template_reads += r.template_reads;
        self.meta_reads += r.meta_reads;
        self.open_bytes += r.open_bytes;
    }
}

/// Schemas shared by every sub-graph instance of a host.
#[derive(Debug)]
struct HostSchema {
    vertex: Vec<AttributeSchema>,
    edge: Vec<AttributeSchema>,
}

impl HostSchema {
    fn of(&self, class: ElementClass) -> &[AttributeSchema] {
        match class {
            ElementClass::Vertex => &self.vertex,
            ElementClass::Edge => &self.edge,
        }
    }
}

/// Validated attribute selection. Only attributes that live in attribute
/// slices are listed; constants are always available.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Projection {
    attrs: Vec<(ElementClass, String)>,
}

impl Projection {
    pub fn attrs(&self) -> impl Iterator<Item = (ElementClass, &str)> + '_ {
        self.attrs.iter().map(|(c, n)| (*c, n.as_str()))
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }
}

/// One sub-graph's values for one instance, restricted to a projection.
#[derive(Clone)]
pub struct SubgraphInstance {
    pub template: Arc<SubgraphTemplate>,
    /// Zero-based position of the instance in the collection.
    pub index: usize,
    pub start: i64,
    pub end: i64,
    schema: Arc<HostSchema>,
    columns: Vec<(ElementClass, String, Arc<AttrSliceData>)>,
}

impl std::fmt::Debug for SubgraphInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubgraphInstance")
            .field("subgraph", &self.template.id)
            .field("index", &self.index)
            .field("start", &self.start)
            .field("end", &self.end)
            .finish_non_exhaustive()
    }
}

impl ValueSource for SubgraphInstance {
    fn raw_values(&self, class: ElementClass, attr: &str, id: u64) -> Option<&[Value]> {
        let (_, _, data) = self.columns.iter().find(|(c, n, _)| *c == class && n == attr)?;
        data.column(self.index, self.template.id)?.get(id)
    }
}

impl SubgraphInstance {
    pub fn id(&self) -> SubgraphId {
        self.template.id
    }

    pub fn is_projected(&self, class: ElementClass, attr: &str) -> bool {
        self.columns.iter().any(|(c, n, _)| *c == class && n == attr)
    }

    fn decl(&self, class: ElementClass, attr: &str) -> Result<&AttributeSchema, StoreError> {
        let decl = self
            .schema
            .of(class)
            .iter()
            .find(|a| a.name == attr)
            .ok_or_else(|| StoreError::UnknownAttribute { class, name: attr.to_string() })?;
        if decl.kind.is_constant() || self.is_projected(class, attr) {
            Ok(decl)
        } else {
            Err(StoreError::NotProjected { class, name: attr.to_string() })
        }
    }

    /// Resolved values of `attr` on `element`, with defaults and constants applied.
    ///
    /// Elements outside this sub-graph (such as the far end of a remote
    /// edge) have no stored values here and resolve as if absent.
    pub fn values(&self, element: ElementRef, attr: &str) -> Result<&[Value], StoreError> {
        let decl = self.decl(element.class(), attr)?;
        Ok(resolve_decl(decl, self, element))
    }

    /// Numeric values of `attr`, skipping non-numeric ones.
    pub fn f64_values(&self, element: ElementRef, attr: &str) -> Result<impl Iterator<Item = f64> + '_, StoreError> {
        Ok(self.values(element, attr)?.iter().filter_map(Value::as_f64))
    }

    /// The element's own `isExists` flag.
    pub fn exists_flag(&self, element: ElementRef) -> Result<bool, StoreError> {
        let class = element.class();
        if self.schema.of(class).iter().any(|a| a.name == IS_EXISTS) {
            self.decl(class, IS_EXISTS)?;
        }
        Ok(exists_flag(self.schema.of(class), self, element))
    }

    /// Existence of a vertex, or of an edge together with those of its
    /// endpoints that belong to this sub-graph. The far endpoint of a remote
    /// edge is judged by whoever owns it.
    pub fn exists(&self, element: ElementRef) -> Result<bool, StoreError> {
        if !self.exists_flag(element)? {
            return Ok(false);
        }
        if let ElementRef::Edge(id) = element {
            let ends =
                self.template.local_edges.iter().find(|e| e.id == id).map(|e| [Some(e.src), Some(e.dst)]).or_else(
                    || self.template.remote_edges.iter().find(|r| r.edge.id == id).map(|r| [Some(r.local), None]),
                );
            for v in ends.into_iter().flatten().flatten() {
                if !self.exists_flag(ElementRef::Vertex(v))? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Whether a vertex of this sub-graph exists, for endpoint lookups by id.
    pub fn vertex_exists(&self, v: VertexId) -> Result<bool, StoreError> {
        self.exists_flag(ElementRef::Vertex(v))
    }
}

/// The slices of one host, opened read-only with an LRU cache for attribute slices.
pub struct HostStore {
    host: usize,
    dir: PathBuf,
    partition: PartitionId,
    directed: bool,
    template: PartitionTemplate,
    meta: MetadataIndex,
    schema: Arc<HostSchema>,
    subgraphs: HashMap<SubgraphId, (u32, Arc<SubgraphTemplate>)>,
    cache: SliceCache<SliceId, AttrSliceData>,
    open: StoreCounters,
}

fn expect_kind(slice: &Slice, kind: SliceKind, path: &Path) -> Result<(), StoreError> {
    if slice.header.kind == kind {
        Ok(())
    } else {
        Err(StoreError::Malformed { path: path.to_path_buf(), what: format!("expected a {kind:?} slice") })
    }
}

impl HostStore {
    /// Loads the template and metadata slices of `host`; both stay resident.
    pub fn open(root: &Path, host: usize, cache_slots: usize) -> Result<Self, StoreError> {
        let dir = host_dir(root, host);
        let tpath = dir.join(TEMPLATE_SLICE);
        let (tslice, tbytes) = read_slice(&tpath)?;
        expect_kind(&tslice, SliceKind::Template, &tpath)?;
        let malformed = |path: &Path, e: super::codec::DecodeError| StoreError::Malformed {
            path: path.to_path_buf(),
            what: e.to_string(),
        };
        let template = PartitionTemplate::decode(&tslice.payload).map_err(|e| malformed(&tpath, e))?;
        let mpath = dir.join(META_SLICE);
        let (mslice, mbytes) = read_slice(&mpath)?;
        expect_kind(&mslice, SliceKind::Metadata, &mpath)?;
        let meta = MetadataIndex::decode(&mslice.payload).map_err(|e| malformed(&mpath, e))?;
        let subgraphs =
            template.bins.iter().flat_map(|(b, sgs)| sgs.iter().map(move |sg| (sg.id, (*b, sg.clone())))).collect();
        let schema =
            Arc::new(HostSchema { vertex: template.vertex_schema.clone(), edge: template.edge_schema.clone() });
        Ok(Self {
            host,
            dir,
            partition: tslice.header.partition,
            directed: template.directed,
            template,
            meta,
            schema,
            subgraphs,
            cache: SliceCache::new(cache_slots),
            open: StoreCounters {
                template_reads: 1,
                meta_reads: 1,
                open_bytes: (tbytes + mbytes) as u64,
                ..Default::default()
            },
        })
    }

    pub fn host(&self) -> usize {
        self.host
    }

    pub fn partition(&self) -> PartitionId {
        self.partition
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn meta(&self) -> &MetadataIndex {
        &self.meta
    }

    pub fn schema(&self, class: ElementClass) -> &[AttributeSchema] {
        self.schema.of(class)
    }

    pub fn cache(&self) -> &SliceCache<SliceId, AttrSliceData> {
        &self.cache
    }

    pub fn counters(&self) -> StoreCounters {
        StoreCounters { cache: self.cache.stats(), ..self.open }
    }

    pub fn bin_count(&self) -> usize {
        self.template.bins.len()
    }

    /// Every sub-graph of the partition, bin by bin, ascending ids within a bin.
    pub fn get_subgraphs(&self) -> impl Iterator<Item = &Arc<SubgraphTemplate>> + '_ {
        self.template.bins.iter().flat_map(|(_, sgs)| sgs.iter())
    }

    pub fn subgraph(&self, id: SubgraphId) -> Option<&Arc<SubgraphTemplate>> {
        self.subgraphs.get(&id).map(|(_, sg)| sg)
    }

    pub fn bin_of(&self, id: SubgraphId) -> Option<u32> {
        self.subgraphs.get(&id).map(|(b, _)| *b)
    }

    pub fn instance_count(&self) -> usize {
        self.meta.instances.len()
    }

    /// Checks attribute names against the schema and drops constants.
    pub fn projection<S: AsRef<str>>(&self, vertex_attrs: &[S], edge_attrs: &[S]) -> Result<Projection, StoreError> {
        let mut attrs: Vec<(ElementClass, String)> = Vec::new();
        for (class, names) in [(ElementClass::Vertex, vertex_attrs), (ElementClass::Edge, edge_attrs)] {
            for name in names {
                let name = name.as_ref();
                let decl = self
                    .schema
                    .of(class)
                    .iter()
                    .find(|a| a.name == name)
                    .ok_or_else(|| StoreError::UnknownAttribute { class, name: name.to_string() })?;
                if !matches!(decl.kind, AttrKind::Constant(_)) && !attrs.iter().any(|(c, n)| *c == class && n == name) {
                    attrs.push((class, name.to_string()));
                }
            }
        }
        Ok(Projection { attrs })
    }

    /// Projection of every non-constant attribute.
    pub fn full_projection(&self) -> Projection {
        let names = |c| self.schema.of(c).iter().map(|a| a.name.as_str()).collect::<Vec<_>>();
        self.projection(&names(ElementClass::Vertex), &names(ElementClass::Edge)).expect("schema names are known")
    }

    /// Reads an attribute slice through the cache.
    pub fn fetch_slice(&self, id: &SliceId) -> Result<(Arc<AttrSliceData>, FetchOutcome), StoreError> {
        self.cache.fetch(id, || {
            let path = self.dir.join(id.rel_path());
            let (slice, bytes) = read_slice(&path)?;
            expect_kind(&slice, SliceKind::Attribute, &path)?;
            let h = &slice.header;
            if h.class != Some(id.class) || h.attr != id.attr || h.bin != id.bin || h.window != id.window {
                return Err(StoreError::Malformed { path, what: "header does not match slice id".into() });
            }
            let data = decode_attr_payload(&slice.payload)
                .map_err(|e| StoreError::Malformed { path: path.clone(), what: e.to_string() })?;
            Ok((data, bytes as u64))
        })
    }

    /// Loads instance `pos` of sub-graph `sg`, reading one slice per projected attribute.
    pub fn load_instance(
        &self,
        sg: SubgraphId,
        pos: usize,
        projection: &Projection,
    ) -> Result<(SubgraphInstance, FetchTally), StoreError> {
        let (bin, template) = self.subgraphs.get(&sg).ok_or(StoreError::UnknownSubgraph(sg))?;
        let info = self
            .meta
            .instances
            .get(pos)
            .ok_or_else(|| StoreError::CorruptDeployment(format!("instance {pos} not indexed")))?;
        let window = self.meta.window_of(pos).expect("indexed instance has a window").window;
        let mut tally = FetchTally::default();
        let mut columns = Vec::with_capacity(projection.len());
        for (class, name) in projection.attrs() {
            let id = SliceId { class, attr: name.to_string(), bin: *bin, window };
            let (data, outcome) = self.fetch_slice(&id)?;
            tally.record(outcome);
            columns.push((class, name.to_string(), data));
        }
        let inst = SubgraphInstance {
            template: template.clone(),
            index: pos,
            start: info.start,
            end: info.end,
            schema: self.schema.clone(),
            columns,
        };
        Ok((inst, tally))
    }

    /// Instances of `sg` intersecting `[start, end)` in time order, carrying
    /// values for the named attributes only. Slices are read lazily.
    pub fn get_instances<S: AsRef<str>>(
        &self,
        sg: SubgraphId,
        start: i64,
        end: i64,
        vertex_attrs: &[S],
        edge_attrs: &[S],
    ) -> Result<InstanceIter<'_>, StoreError> {
        if !self.subgraphs.contains_key(&sg) {
            return Err(StoreError::UnknownSubgraph(sg));
        }
        let projection = self.projection(vertex_attrs, edge_attrs)?;
        Ok(InstanceIter { store: self, sg, positions: self.meta.instances_in(start, end), projection })
    }
}

pub struct InstanceIter<'a> {
    store: &'a HostStore,
    sg: SubgraphId,
    positions: Range<usize>,
    projection: Projection,
}

impl Iterator for InstanceIter<'_> {
    type Item = Result<SubgraphInstance, StoreError>;

    fn next(&mut self) -> Option<Self::Item> {
        let pos = self.positions.next()?;
        Some(self.store.load_instance(self.sg, pos, &self.projection).map(|(i, _)| i))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.positions.size_hint()
    }
}

/// All hosts of a deployment, opened in one process.
pub struct Deployment {
    pub root: PathBuf,
    pub manifest: DeploymentManifest,
    hosts: Vec<HostStore>,
    owner: HashMap<VertexId, SubgraphId>,
}

impl Deployment {
    /// Opens every host with `cache_slots` cache slots each.
    pub fn open(root: &Path, cache_slots: usize) -> Result<Self, StoreError> {
        let manifest = DeploymentManifest::read(root)?;
        let hosts =
            (0..manifest.hosts).map(|k| HostStore::open(root, k, cache_slots)).collect::<Result<Vec<_>, _>>()?;
        for (k, h) in hosts.iter().enumerate() {
            if h.partition.0 as usize != k {
                return Err(StoreError::CorruptDeployment(format!("host {k} holds partition {}", h.partition)));
            }
        }
        let map_path = root.join(PARTITION_MAP_FILE);
        let owner = read_partition_map(&map_path)
            .map_err(|e| StoreError::CorruptDeployment(format!("{}: {e}", map_path.display())))?
            .into_iter()
            .map(|r| (r.vertex, r.subgraph))
            .collect();
        Ok(Self { root: root.to_path_buf(), manifest, hosts, owner })
    }

    pub fn hosts(&self) -> &[HostStore] {
        &self.hosts
    }

    pub fn host(&self, k: usize) -> &HostStore {
        &self.hosts[k]
    }

    pub fn host_of(&self, sg: SubgraphId) -> Option<&HostStore> {
        self.hosts.get(sg.partition().0 as usize).filter(|h| h.subgraphs.contains_key(&sg))
    }

    /// Owning sub-graph of a template vertex.
    pub fn owner(&self, v: VertexId) -> Option<SubgraphId> {
        self.owner.get(&v).copied()
    }

    pub fn is_directed(&self) -> bool {
        self.manifest.directed
    }

    pub fn instance_count(&self) -> usize {
        self.manifest.instances
    }

    pub fn counters(&self) -> StoreCounters {
        let mut c = StoreCounters::default();
        for h in &self.hosts {
            c += h.counters();
        }
        c
    }

    /// Every sub-graph id across hosts, ascending.
    pub fn subgraph_ids(&self) -> Vec<SubgraphId> {
        let mut ids: Vec<_> = self.hosts.iter().flat_map(|h| h.subgraphs.keys().copied()).collect();
        ids.sort_unstable();
        ids
    }
}
