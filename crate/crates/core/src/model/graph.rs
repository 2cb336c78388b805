use std::collections::{BTreeMap, HashMap};

use super::{AttributeSchema, ElementClass, Value};

pub type VertexId = u64;
pub type EdgeId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: EdgeId,
    pub src: VertexId,
    pub dst: VertexId,
}

impl Edge {
    pub fn new(id: EdgeId, src: VertexId, dst: VertexId) -> Self {
        Self { id, src, dst }
    }

    /// The endpoint opposite to `v`.
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.src == v {
            self.dst
        } else {
            self.src
        }
    }
}

/// Time-invariant topology and attribute schema shared by every instance.
///
/// Construction does not check invariants; run [`validate`](super::validate)
/// on the owning collection for that.
#[derive(Clone, Debug)]
pub struct GraphTemplate {
    directed: bool,
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    vertex_schema: Vec<AttributeSchema>,
    edge_schema: Vec<AttributeSchema>,
    vertex_index: HashMap<VertexId, usize>,
    edge_index: HashMap<EdgeId, usize>,
}

impl GraphTemplate {
    pub fn new(
        directed: bool,
        vertices: Vec<VertexId>,
        edges: Vec<Edge>,
        vertex_schema: Vec<AttributeSchema>,
        edge_schema: Vec<AttributeSchema>,
    ) -> Self {
        let mut vertex_index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            vertex_index.entry(*v).or_insert(i);
        }
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            edge_index.entry(e.id).or_insert(i);
        }
        Self { directed, vertices, edges, vertex_schema, edge_schema, vertex_index, edge_index }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertex_index.contains_key(&v)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edge_index.get(&id).map(|&i| &self.edges[i])
    }

    pub fn has_element(&self, class: ElementClass, id: u64) -> bool {
        match class {
            ElementClass::Vertex => self.vertex_index.contains_key(&id),
            ElementClass::Edge => self.edge_index.contains_key(&id),
        }
    }

    pub fn vertex_schema(&self) -> &[AttributeSchema] {
        &self.vertex_schema
    }

    pub fn edge_schema(&self) -> &[AttributeSchema] {
        &self.edge_schema
    }

    pub fn schema(&self, class: ElementClass) -> &[AttributeSchema] {
        match class {
            ElementClass::Vertex => &self.vertex_schema,
            ElementClass::Edge => &self.edge_schema,
        }
    }

    pub fn attribute(&self, class: ElementClass, name: &str) -> Option<&AttributeSchema> {
        self.schema(class).iter().find(|a| a.name == name)
    }
}

/// Values of one attribute for a set of elements, stored sorted by element id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AttrColumn {
    ids: Vec<u64>,
    offsets: Vec<u32>,
    values: Vec<Value>,
}

impl AttrColumn {
    pub fn new() -> Self {
        Self { ids: Vec::new(), offsets: vec![0], values: Vec::new() }
    }

    /// Builds a column from `(id, values)` pairs given in strictly increasing id order.
    pub(crate) fn from_sorted<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (u64, Vec<Value>)>,
    {
        let mut col = Self::new();
        for (id, vals) in entries {
            col.push(id, vals);
        }
        col
    }

    /// Appends an entry; ids must be pushed in increasing order.
    pub(crate) fn push(&mut self, id: u64, vals: impl IntoIterator<Item = Value>) {
        debug_assert!(self.ids.last().is_none_or(|last| *last < id));
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        self.ids.push(id);
        self.values.extend(vals);
        self.offsets.push(self.values.len() as u32);
    }

    pub fn get(&self, id: u64) -> Option<&[Value]> {
        let i = self.ids.binary_search(&id).ok()?;
        Some(&self.values[self.offsets[i] as usize..self.offsets[i + 1] as usize])
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn value_count(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &[Value])> + '_ {
        self.ids
            .iter()
            .enumerate()
            .map(move |(i, id)| (*id, &self.values[self.offsets[i] as usize..self.offsets[i + 1] as usize]))
    }
}

/// Attribute values of every element for one time window `[start, end)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphInstance {
    pub start: i64,
    pub end: i64,
    vertex_values: BTreeMap<String, AttrColumn>,
    edge_values: BTreeMap<String, AttrColumn>,
}

impl GraphInstance {
    pub fn builder(start: i64, end: i64) -> InstanceBuilder {
        InstanceBuilder { start, end, vertex: BTreeMap::new(), edge: BTreeMap::new() }
    }

    pub fn columns(&self, class: ElementClass) -> &BTreeMap<String, AttrColumn> {
        match class {
            ElementClass::Vertex => &self.vertex_values,
            ElementClass::Edge => &self.edge_values,
        }
    }

    pub fn column(&self, class: ElementClass, attr: &str) -> Option<&AttrColumn> {
        self.columns(class).get(attr)
    }

    pub fn values(&self, class: ElementClass, attr: &str, id: u64) -> Option<&[Value]> {
        self.column(class, attr)?.get(id)
    }
}

/// Accumulates instance values in any order.
#[derive(Clone, Debug)]
pub struct InstanceBuilder {
    start: i64,
    end: i64,
    vertex: BTreeMap<String, BTreeMap<u64, Vec<Value>>>,
    edge: BTreeMap<String, BTreeMap<u64, Vec<Value>>>,
}

impl InstanceBuilder {
    pub fn push(&mut self, class: ElementClass, id: u64, attr: &str, value: Value) -> &mut Self {
        let map = match class {
            ElementClass::Vertex => &mut self.vertex,
            ElementClass::Edge => &mut self.edge,
        };
        map.entry(attr.to_string()).or_default().entry(id).or_default().push(value);
        self
    }

    pub fn vertex(&mut self, id: VertexId, attr: &str, value: Value) -> &mut Self {
        self.push(ElementClass::Vertex, id, attr, value)
    }

    pub fn edge(&mut self, id: EdgeId, attr: &str, value: Value) -> &mut Self {
        self.push(ElementClass::Edge, id, attr, value)
    }

    pub fn build(self) -> GraphInstance {
        let freeze = |m: BTreeMap<String, BTreeMap<u64, Vec<Value>>>| {
            m.into_iter().map(|(k, v)| (k, AttrColumn::from_sorted(v))).collect()
        };
        GraphInstance {
            start: self.start,
            end: self.end,
            vertex_values: freeze(self.vertex),
            edge_values: freeze(self.edge),
        }
    }
}

/// A template together with its time-ordered instances.
#[derive(Clone, Debug)]
pub struct Collection {
    pub template: GraphTemplate,
    pub instances: Vec<GraphInstance>,
}

impl Collection {
    pub fn new(template: GraphTemplate, instances: Vec<GraphInstance>) -> Self {
        Self { template, instances }
    }
}
