//! Payload layouts of template, metadata and attribute slices.
//!
//! All three use the little-endian primitives of [`codec`](super::codec):
//! `str` is a u32 length followed by utf-8 bytes, lists are a u32 count
//! followed by their items, tagged values are a type byte plus the value.
//!
//! Template payload:
//! `directed u8, vertex schema, edge schema, bins: list of { bin u32, subgraphs: list }`,
//! where a schema is a list of `{ name str, type u8, kind u8, [tagged value] }`
//! and a subgraph is `{ id u64, partition u32, vertices: list of u64,
//! local edges: list of (id, src, dst), remote edges: list of (id, src, dst,
//! local u64, remote u64, target sg u64, target partition u32) }`.
//!
//! Metadata payload:
//! `instances_per_slice u32, instances: list of (index u32, start i64, end i64),
//! windows: list of (window u32, first u32, count u32, start i64, end i64),
//! bins: list of (bin u32, list of sg u64), attributes: list of
//! (class u8, name str, type u8, bin u32, windows: list of u32)`.
//!
//! Attribute payload:
//! `type u8, instances: list of { index u32, subgraphs: list of { sg u64,
//! entries: list of { id u64, values: list of value } } }`.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::codec::{ByteReader, ByteWriter, DecodeError};
use super::slice::SliceId;
use crate::model::{AttrColumn, AttrKind, AttributeSchema, Edge, ElementClass, Value, ValueType};
use crate::partition::{PartitionId, RemoteEdge, RemoteTarget, SubgraphId, SubgraphTemplate};

fn class_tag(c: ElementClass) -> u8 {
    match c {
        ElementClass::Vertex => 1,
        ElementClass::Edge => 2,
    }
}

fn class_from(t: u8) -> Result<ElementClass, DecodeError> {
    match t {
        1 => Ok(ElementClass::Vertex),
        2 => Ok(ElementClass::Edge),
        _ => Err(DecodeError("bad element class")),
    }
}

fn value_type(r: &mut ByteReader<'_>) -> Result<ValueType, DecodeError> {
    ValueType::from_tag(r.u8()?).ok_or(DecodeError("bad value type"))
}

/// Schema and sub-graph topology of one partition, grouped by bin.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionTemplate {
    pub directed: bool,
    pub vertex_schema: Vec<AttributeSchema>,
    pub edge_schema: Vec<AttributeSchema>,
    pub bins: Vec<(u32, Vec<Arc<SubgraphTemplate>>)>,
}

fn write_schema(w: &mut ByteWriter, schema: &[AttributeSchema]) {
    w.len(schema.len());
    for a in schema {
        w.str(&a.name);
        w.u8(a.value_type.tag());
        match &a.kind {
            AttrKind::Normal => w.u8(0),
            AttrKind::Default(v) => {
                w.u8(1);
                w.tagged_value(v);
            }
            AttrKind::Constant(v) => {
                w.u8(2);
                w.tagged_value(v);
            }
        }
    }
}

fn read_schema(r: &mut ByteReader<'_>) -> Result<Vec<AttributeSchema>, DecodeError> {
    let n = r.len()?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let name = r.str()?;
        let value_type = value_type(r)?;
        let kind = match r.u8()? {
            0 => AttrKind::Normal,
            1 => AttrKind::Default(r.tagged_value()?),
            2 => AttrKind::Constant(r.tagged_value()?),
            _ => return Err(DecodeError("bad attribute kind")),
        };
        out.push(AttributeSchema { name, value_type, kind });
    }
    Ok(out)
}

fn write_edge(w: &mut ByteWriter, e: &Edge) {
    w.u64(e.id);
    w.u64(e.src);
    w.u64(e.dst);
}

fn read_edge(r: &mut ByteReader<'_>) -> Result<Edge, DecodeError> {
    Ok(Edge::new(r.u64()?, r.u64()?, r.u64()?))
}

impl PartitionTemplate {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = ByteWriter::default();
        w.u8(self.directed as u8);
        write_schema(&mut w, &self.vertex_schema);
        write_schema(&mut w, &self.edge_schema);
        w.len(self.bins.len());
        for (bin, sgs) in &self.bins {
            w.u32(*bin);
            w.len(sgs.len());
            for sg in sgs {
                w.u64(sg.id.0);
                w.u32(sg.partition.0);
                w.len(sg.vertices.len());
                for v in &sg.vertices {
                    w.u64(*v);
                }
                w.len(sg.local_edges.len());
                for e in &sg.local_edges {
                    write_edge(&mut w, e);
                }
                w.len(sg.remote_edges.len());
                for re in &sg.remote_edges {
                    write_edge(&mut w, &re.edge);
                    w.u64(re.local);
                    w.u64(re.remote);
                    let t = re.target.expect("remote edges resolved before deployment");
                    w.u64(t.subgraph.0);
                    w.u32(t.partition.0);
                }
            }
        }
        w.buf
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = ByteReader::new(bytes);
        let directed = r.u8()? != 0;
        let vertex_schema = read_schema(&mut r)?;
        let edge_schema = read_schema(&mut r)?;
        let nbins = r.len()?;
        let mut bins = Vec::with_capacity(nbins);
        for _ in 0..nbins {
            let bin = r.u32()?;
            let n = r.len()?;
            let mut sgs = Vec::with_capacity(n);
            for _ in 0..n {
                let id = SubgraphId(r.u64()?);
                let partition = PartitionId(r.u32()?);
                let nv = r.len()?;
                let vertices = (0..nv).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
                let nl = r.len()?;
                let local_edges = (0..nl).map(|_| read_edge(&mut r)).collect::<Result<Vec<_>, _>>()?;
                let nr = r.len()?;
                let mut remote_edges = Vec::with_capacity(nr);
                for _ in 0..nr {
                    let edge = read_edge(&mut r)?;
                    let local = r.u64()?;
                    let remote = r.u64()?;
                    let target = RemoteTarget { subgraph: SubgraphId(r.u64()?), partition: PartitionId(r.u32()?) };
                    remote_edges.push(RemoteEdge { edge, local, remote, target: Some(target) });
                }
                sgs.push(Arc::new(SubgraphTemplate { id, partition, vertices, local_edges, remote_edges }));
            }
            bins.push((bin, sgs));
        }
        r.finish()?;
        Ok(Self { directed, vertex_schema, edge_schema, bins })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceInfo {
    pub index: u32,
    pub start: i64,
    pub end: i64,
}

/// A run of consecutive instances stored together.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowInfo {
    pub window: u32,
    pub first: u32,
    pub count: u32,
    /// Windows tile the collection span: each ends where the next begins.
    pub start: i64,
    pub end: i64,
}

/// Per-bin list of the windows stored for one attribute.
pub type StoredWindows = BTreeMap<u32, Vec<u32>>;

/// One window of an attribute slice: `(instance, sub-graph → sorted entries)`.
pub(crate) type WindowEntries<'a> = [(u32, BTreeMap<SubgraphId, Vec<(u64, &'a [Value])>>)];

/// Index from time ranges and attribute names to the slices holding them.
#[derive(Clone, Debug, PartialEq)]
pub struct MetadataIndex {
    pub instances_per_slice: u32,
    pub instances: Vec<InstanceInfo>,
    pub windows: Vec<WindowInfo>,
    /// Bin-major order: bins ascending, sub-graphs ascending within a bin.
    pub bins: Vec<(u32, Vec<SubgraphId>)>,
    /// (class, attribute) → (type, windows stored).
    pub attributes: BTreeMap<(ElementClass, String), (ValueType, StoredWindows)>,
}

impl MetadataIndex {
    pub fn window_of(&self, instance: usize) -> Option<&WindowInfo> {
        let w = instance / self.instances_per_slice.max(1) as usize;
        self.windows.get(w)
    }

    /// Instance positions whose range intersects `[start, end)`.
    pub fn instances_in(&self, start: i64, end: i64) -> std::ops::Range<usize> {
        if start >= end {
            return 0..0;
        }
        let lo = self.instances.partition_point(|i| i.end <= start);
        let hi = self.instances.partition_point(|i| i.start < end);
        lo..hi.max(lo)
    }

    /// Attribute slices covering `[start, end)` for the given attributes, in window order.
    pub fn slices_for(&self, start: i64, end: i64, attrs: &[(ElementClass, &str)]) -> Vec<SliceId> {
        let range = self.instances_in(start, end);
        if range.is_empty() {
            return Vec::new();
        }
        let per = self.instances_per_slice.max(1) as usize;
        let (w0, w1) = ((range.start / per) as u32, ((range.end - 1) / per) as u32);
        let mut out = Vec::new();
        for w in w0..=w1 {
            for (class, name) in attrs {
                if let Some((_, bins)) = self.attributes.get(&(*class, name.to_string())) {
                    for (bin, windows) in bins {
                        if windows.contains(&w) {
                            out.push(SliceId { class: *class, attr: name.to_string(), bin: *bin, window: w });
                        }
                    }
                }
            }
        }
        out
    }

    /// Every attribute slice id listed in the attribute index.
    pub fn all_slices(&self) -> Vec<SliceId> {
        let mut out = Vec::new();
        for ((class, name), (_, bins)) in &self.attributes {
            for (bin, windows) in bins {
                for w in windows {
                    out.push(SliceId { class: *class, attr: name.clone(), bin: *bin, window: *w });
                }
            }
        }
        out
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = ByteWriter::default();
        w.u32(self.instances_per_slice);
        w.len(self.instances.len());
        for i in &self.instances {
            w.u32(i.index);
            w.i64(i.start);
            w.i64(i.end);
        }
        w.len(self.windows.len());
        for x in &self.windows {
            w.u32(x.window);
            w.u32(x.first);
            w.u32(x.count);
            w.i64(x.start);
            w.i64(x.end);
        }
        w.len(self.bins.len());
        for (bin, sgs) in &self.bins {
            w.u32(*bin);
            w.len(sgs.len());
            for sg in sgs {
                w.u64(sg.0);
            }
        }
        let count: usize = self.attributes.values().map(|(_, b)| b.len()).sum();
        w.len(count);
        for ((class, name), (ty, bins)) in &self.attributes {
            for (bin, windows) in bins {
                w.u8(class_tag(*class));
                w.str(name);
                w.u8(ty.tag());
                w.u32(*bin);
                w.len(windows.len());
                for x in windows {
                    w.u32(*x);
                }
            }
        }
        w.buf
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = ByteReader::new(bytes);
        let instances_per_slice = r.u32()?;
        let n = r.len()?;
        let mut instances = Vec::with_capacity(n);
        for _ in 0..n {
            instances.push(InstanceInfo { index: r.u32()?, start: r.i64()?, end: r.i64()? });
        }
        let n = r.len()?;
        let mut windows = Vec::with_capacity(n);
        for _ in 0..n {
            windows.push(WindowInfo {
                window: r.u32()?,
                first: r.u32()?,
                count: r.u32()?,
                start: r.i64()?,
                end: r.i64()?,
            });
        }
        let n = r.len()?;
        let mut bins = Vec::with_capacity(n);
        for _ in 0..n {
            let bin = r.u32()?;
            let k = r.len()?;
            let sgs = (0..k).map(|_| r.u64().map(SubgraphId)).collect::<Result<Vec<_>, _>>()?;
            bins.push((bin, sgs));
        }
        let n = r.len()?;
        let mut attributes: BTreeMap<(ElementClass, String), (ValueType, StoredWindows)> = BTreeMap::new();
        for _ in 0..n {
            let class = class_from(r.u8()?)?;
            let name = r.str()?;
            let ty = value_type(&mut r)?;
            let bin = r.u32()?;
            let k = r.len()?;
            let ws = (0..k).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            attributes.entry((class, name)).or_insert_with(|| (ty, BTreeMap::new())).1.insert(bin, ws);
        }
        r.finish()?;
        Ok(Self { instances_per_slice, instances, windows, bins, attributes })
    }
}

/// Decoded attribute slice: one attribute, one bin, a window of instances.
#[derive(Clone, Debug, PartialEq)]
pub struct AttrSliceData {
    pub value_type: ValueType,
    /// Global instance positions covered, ascending.
    pub instances: Vec<u32>,
    /// Per covered instance: sub-graph → its elements' values.
    pub columns: Vec<BTreeMap<SubgraphId, AttrColumn>>,
}

impl AttrSliceData {
    pub fn column(&self, instance: usize, sg: SubgraphId) -> Option<&AttrColumn> {
        let pos = self.instances.binary_search(&(instance as u32)).ok()?;
        self.columns[pos].get(&sg)
    }
}

/// Encodes one window of one attribute and bin.
pub(crate) fn encode_attr_payload(ty: ValueType, window: &WindowEntries<'_>) -> Vec<u8> {
    let mut w = ByteWriter::default();
    w.u8(ty.tag());
    w.len(window.len());
    for (index, sgs) in window {
        w.u32(*index);
        w.len(sgs.len());
        for (sg, entries) in sgs {
            w.u64(sg.0);
            w.len(entries.len());
            for (id, values) in entries {
                w.u64(*id);
                w.len(values.len());
                for v in *values {
                    w.value(v);
                }
            }
        }
    }
    w.buf
}

pub(crate) fn decode_attr_payload(bytes: &[u8]) -> Result<AttrSliceData, DecodeError> {
    let mut r = ByteReader::new(bytes);
    let ty = value_type(&mut r)?;
    let n = r.len()?;
    let mut instances = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(n);
    for _ in 0..n {
        instances.push(r.u32()?);
        let nsg = r.len()?;
        let mut map = BTreeMap::new();
        for _ in 0..nsg {
            let sg = SubgraphId(r.u64()?);
            let ne = r.len()?;
            let mut col = AttrColumn::new();
            for _ in 0..ne {
                let id = r.u64()?;
                let nv = r.len()?;
                let vals = (0..nv).map(|_| r.value(ty)).collect::<Result<Vec<_>, _>>()?;
                col.push(id, vals);
            }
            map.insert(sg, col);
        }
        columns.push(map);
    }
    r.finish()?;
    Ok(AttrSliceData { value_type: ty, instances, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_round_trip() {
        let sg = SubgraphTemplate {
            id: SubgraphId::new(PartitionId(1), 0),
            partition: PartitionId(1),
            vertices: vec![1, 2],
            local_edges: vec![Edge::new(5, 1, 2)],
            remote_edges: vec![RemoteEdge {
                edge: Edge::new(6, 2, 9),
                local: 2,
                remote: 9,
                target: Some(RemoteTarget { subgraph: SubgraphId::new(PartitionId(0), 3), partition: PartitionId(0) }),
            }],
        };
        let t = PartitionTemplate {
            directed: true,
            vertex_schema: vec![AttributeSchema::constant("ip", Value::Str("a b".into()))],
            edge_schema: vec![
                AttributeSchema::normal("latency", ValueType::Float),
                AttributeSchema::with_default("isExists", Value::Bool(true)),
            ],
            bins: vec![(0, vec![Arc::new(sg)]), (1, vec![])],
        };
        assert_eq!(PartitionTemplate::decode(&t.encode()).unwrap(), t);
    }

    #[test]
    fn metadata_range_lookup() {
        let instances: Vec<_> =
            (0..5).map(|i| InstanceInfo { index: i, start: i as i64 * 10, end: i as i64 * 10 + 10 }).collect();
        let mut attributes = BTreeMap::new();
        attributes.insert(
            (ElementClass::Edge, "lat".to_string()),
            (ValueType::Float, BTreeMap::from([(0, vec![0, 1, 2]), (1, vec![0, 1, 2])])),
        );
        let m = MetadataIndex {
            instances_per_slice: 2,
            instances,
            windows: vec![
                WindowInfo { window: 0, first: 0, count: 2, start: 0, end: 20 },
                WindowInfo { window: 1, first: 2, count: 2, start: 20, end: 40 },
                WindowInfo { window: 2, first: 4, count: 1, start: 40, end: 50 },
            ],
            bins: vec![(0, vec![SubgraphId(1)]), (1, vec![SubgraphId(2)])],
            attributes,
        };
        assert_eq!(MetadataIndex::decode(&m.encode()).unwrap(), m);
        assert_eq!(m.instances_in(25, 31), 2..4);
        assert_eq!(m.instances_in(5, 5), 0..0);
        assert_eq!(m.instances_in(100, 200), 5..5);
        let ids = m.slices_for(25, 29, &[(ElementClass::Edge, "lat")]);
        assert_eq!(ids.len(), 2);
        assert!(ids.iter().all(|s| s.window == 1));
    }

    #[test]
    fn attr_payload_round_trip() {
        let vals = [Value::Float(1.5), Value::Float(-2.0)];
        let mut sgs = BTreeMap::new();
        sgs.insert(SubgraphId(4), vec![(1u64, &vals[..]), (3, &vals[..1])]);
        let window = vec![(7u32, sgs), (8, BTreeMap::new())];
        let data = decode_attr_payload(&encode_attr_payload(ValueType::Float, &window)).unwrap();
        assert_eq!(data.instances, vec![7, 8]);
        assert_eq!(data.column(7, SubgraphId(4)).unwrap().get(1).unwrap(), &vals);
        assert!(data.column(8, SubgraphId(4)).is_none());
    }
}
