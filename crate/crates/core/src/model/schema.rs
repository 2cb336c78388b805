use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Value, ValueType};

/// Attribute name reserved for element identifiers.
pub const RESERVED_ID: &str = "id";

/// Boolean attribute that marks whether an element is present in an instance.
pub const IS_EXISTS: &str = "isExists";

/// Whether a value is per-instance, defaulted in the template, or fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AttrKind {
    Normal,
    Default(Value),
    Constant(Value),
}

impl AttrKind {
    pub fn is_constant(&self) -> bool {
        matches!(self, AttrKind::Constant(_))
    }

    /// The template-level value, if any.
    pub fn inherited(&self) -> Option<&Value> {
        match self {
            AttrKind::Normal => None,
            AttrKind::Default(v) | AttrKind::Constant(v) => Some(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub value_type: ValueType,
    pub kind: AttrKind,
}

impl AttributeSchema {
    pub fn normal(name: impl Into<String>, value_type: ValueType) -> Self {
        Self { name: name.into(), value_type, kind: AttrKind::Normal }
    }

    pub fn with_default(name: impl Into<String>, value: Value) -> Self {
        Self { name: name.into(), value_type: value.value_type(), kind: AttrKind::Default(value) }
    }

    pub fn constant(name: impl Into<String>, value: Value) -> Self {
        Self { name: name.into(), value_type: value.value_type(), kind: AttrKind::Constant(value) }
    }
}

/// Vertex or edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementClass {
    Vertex,
    Edge,
}

impl ElementClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementClass::Vertex => "vertex",
            ElementClass::Edge => "edge",
        }
    }
}

impl fmt::Display for ElementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A template vertex or edge, by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementRef {
    Vertex(u64),
    Edge(u64),
}

impl ElementRef {
    pub fn class(self) -> ElementClass {
        match self {
            ElementRef::Vertex(_) => ElementClass::Vertex,
            ElementRef::Edge(_) => ElementClass::Edge,
        }
    }

    pub fn id(self) -> u64 {
        match self {
            ElementRef::Vertex(id) | ElementRef::Edge(id) => id,
        }
    }

    pub fn new(class: ElementClass, id: u64) -> Self {
        match class {
            ElementClass::Vertex => ElementRef::Vertex(id),
            ElementClass::Edge => ElementRef::Edge(id),
        }
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementRef::Vertex(id) => write!(f, "v{id}"),
            ElementRef::Edge(id) => write!(f, "e{id}"),
        }
    }
}
