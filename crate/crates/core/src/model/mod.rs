//! Time-series graph collections: template topology, attribute schemas and
//! per-window instance values.

mod graph;
mod resolve;
mod schema;
pub mod text;
mod validate;
mod value;

pub use graph::{AttrColumn, Collection, Edge, EdgeId, GraphInstance, GraphTemplate, InstanceBuilder, VertexId};
pub(crate) use resolve::resolve_decl;
pub use resolve::{exists_flag, is_exists, resolve_attribute, resolve_in, ValueSource};
pub use schema::{AttrKind, AttributeSchema, ElementClass, ElementRef, IS_EXISTS, RESERVED_ID};
pub use validate::{validate, Violation, ViolationKind};
pub use value::{Value, ValueType};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("no such attribute: {class} `{name}`")]
    NoSuchAttribute { class: ElementClass, name: String },
    #[error("{0}")]
    Parse(String),
    #[error("{file}:{line}: {msg}")]
    Syntax { file: String, line: usize, msg: String },
    #[error("invalid collection: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
