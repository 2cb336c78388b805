use std::collections::HashSet;
use std::fmt;

use super::{AttrKind, AttributeSchema, Collection, ElementClass, ElementRef, IS_EXISTS, RESERVED_ID};

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    DuplicateVertex,
    DuplicateEdge,
    DanglingEndpoint { vertex: u64 },
    DuplicateAttribute { class: ElementClass, name: String },
    ReservedAttribute { class: ElementClass },
    SchemaValueType { class: ElementClass, name: String },
    ExistsNotBoolean { class: ElementClass },
    EmptyTimeRange,
    OutOfOrder,
    UnknownAttribute { class: ElementClass, name: String },
    UnknownElement,
    TypeMismatch { name: String },
    ConstantOverride { name: String },
}

/// One broken model constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Index of the offending instance, if the problem is instance data.
    pub instance: Option<usize>,
    pub element: Option<ElementRef>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(i) = self.instance {
            write!(f, "instance {i}: ")?;
        }
        let el = self.element.map(|e| e.to_string()).unwrap_or_default();
        match &self.kind {
            ViolationKind::DuplicateVertex | ViolationKind::DuplicateEdge => write!(f, "duplicate id {el}"),
            ViolationKind::DanglingEndpoint { vertex } => write!(f, "dangling endpoint {el} (v{vertex})"),
            ViolationKind::DuplicateAttribute { class, name } => write!(f, "duplicate {class} attribute {name}"),
            ViolationKind::ReservedAttribute { class } => {
                write!(f, "{class} schema declares reserved attribute `{RESERVED_ID}`")
            }
            ViolationKind::SchemaValueType { class, name } => {
                write!(f, "{class} attribute {name} has a template value of the wrong type")
            }
            ViolationKind::ExistsNotBoolean { class } => write!(f, "{class} attribute {IS_EXISTS} must be boolean"),
            ViolationKind::EmptyTimeRange => write!(f, "empty time range"),
            ViolationKind::OutOfOrder => write!(f, "time range overlaps or precedes the previous instance"),
            ViolationKind::UnknownAttribute { class, name } => write!(f, "unknown {class} attribute {name}"),
            ViolationKind::UnknownElement => write!(f, "values for unknown element {el}"),
            ViolationKind::TypeMismatch { name } => write!(f, "type mismatch on {el} attribute {name}"),
            ViolationKind::ConstantOverride { name } => write!(f, "constant override on {el} attribute {name}"),
        }
    }
}

fn check_schema(class: ElementClass, schema: &[AttributeSchema], out: &mut Vec<Violation>) {
    let mut seen = HashSet::new();
    let mut push = |kind| out.push(Violation { instance: None, element: None, kind });
    for a in schema {
        if a.name == RESERVED_ID {
            push(ViolationKind::ReservedAttribute { class });
        }
        if !seen.insert(a.name.as_str()) {
            push(ViolationKind::DuplicateAttribute { class, name: a.name.clone() });
        }
        if let Some(v) = a.kind.inherited() {
            if v.value_type() != a.value_type {
                push(ViolationKind::SchemaValueType { class, name: a.name.clone() });
            }
        }
        if a.name == IS_EXISTS && a.value_type != super::ValueType::Boolean {
            push(ViolationKind::ExistsNotBoolean { class });
        }
    }
}

/// Lists every schema, topology, ordering and value violation. Empty means valid.
pub fn validate(collection: &Collection) -> Vec<Violation> {
    let t = &collection.template;
    let mut out = Vec::new();

    let mut seen = HashSet::new();
    for v in t.vertices() {
        if !seen.insert(*v) {
            out.push(Violation {
                instance: None,
                element: Some(ElementRef::Vertex(*v)),
                kind: ViolationKind::DuplicateVertex,
            });
        }
    }
    let mut seen = HashSet::new();
    for e in t.edges() {
        let el = Some(ElementRef::Edge(e.id));
        if !seen.insert(e.id) {
            out.push(Violation { instance: None, element: el, kind: ViolationKind::DuplicateEdge });
        }
        for end in [e.src, e.dst] {
            if !t.has_vertex(end) {
                out.push(Violation {
                    instance: None,
                    element: el,
                    kind: ViolationKind::DanglingEndpoint { vertex: end },
                });
            }
        }
    }
    check_schema(ElementClass::Vertex, t.vertex_schema(), &mut out);
    check_schema(ElementClass::Edge, t.edge_schema(), &mut out);

    let mut prev_end: Option<i64> = None;
    for (i, inst) in collection.instances.iter().enumerate() {
        let at = Some(i);
        if inst.start >= inst.end {
            out.push(Violation { instance: at, element: None, kind: ViolationKind::EmptyTimeRange });
        }
        if let Some(pe) = prev_end {
            if inst.start < pe {
                out.push(Violation { instance: at, element: None, kind: ViolationKind::OutOfOrder });
            }
        }
        prev_end = Some(prev_end.map_or(inst.end, |pe| pe.max(inst.end)));

        for class in [ElementClass::Vertex, ElementClass::Edge] {
            for (name, column) in inst.columns(class) {
                let Some(decl) = t.attribute(class, name) else {
                    out.push(Violation {
                        instance: at,
                        element: None,
                        kind: ViolationKind::UnknownAttribute { class, name: name.clone() },
                    });
                    continue;
                };
                for (id, values) in column.iter() {
                    let el = Some(ElementRef::new(class, id));
                    if !t.has_element(class, id) {
                        out.push(Violation { instance: at, element: el, kind: ViolationKind::UnknownElement });
                        continue;
                    }
                    if matches!(decl.kind, AttrKind::Constant(_)) {
                        out.push(Violation {
                            instance: at,
                            element: el,
                            kind: ViolationKind::ConstantOverride { name: name.clone() },
                        });
                    }
                    if values.iter().any(|v| v.value_type() != decl.value_type) {
                        out.push(Violation {
                            instance: at,
                            element: el,
                            kind: ViolationKind::TypeMismatch { name: name.clone() },
                        });
                    }
                }
            }
        }
    }
    out
}
