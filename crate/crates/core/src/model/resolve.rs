//! Value inheritance: instance values, template defaults and constants.

use super::{
    AttrKind, AttributeSchema, ElementClass, ElementRef, GraphInstance, GraphTemplate, ModelError, Value, IS_EXISTS,
};

/// Anything that can hand out raw (un-inherited) per-element values.
pub trait ValueSource {
    fn raw_values(&self, class: ElementClass, attr: &str, id: u64) -> Option<&[Value]>;
}

impl ValueSource for GraphInstance {
    fn raw_values(&self, class: ElementClass, attr: &str, id: u64) -> Option<&[Value]> {
        self.values(class, attr, id)
    }
}

/// Resolves `attr` on `element`, borrowing from either the source or the schema.
///
/// Constants always come from the schema. Otherwise instance values win,
/// then the schema default, then the empty list.
pub fn resolve_in<'a, S: ValueSource + ?Sized>(
    schema: &'a [AttributeSchema],
    source: &'a S,
    element: ElementRef,
    attr: &str,
) -> Result<&'a [Value], ModelError> {
    let decl = schema
        .iter()
        .find(|a| a.name == attr)
        .ok_or_else(|| ModelError::NoSuchAttribute { class: element.class(), name: attr.to_string() })?;
    Ok(resolve_decl(decl, source, element))
}

pub(crate) fn resolve_decl<'a, S: ValueSource + ?Sized>(
    decl: &'a AttributeSchema,
    source: &'a S,
    element: ElementRef,
) -> &'a [Value] {
    match &decl.kind {
        AttrKind::Constant(v) => std::slice::from_ref(v),
        AttrKind::Default(v) => {
            source.raw_values(element.class(), &decl.name, element.id()).unwrap_or(std::slice::from_ref(v))
        }
        AttrKind::Normal => source.raw_values(element.class(), &decl.name, element.id()).unwrap_or(&[]),
    }
}

/// Owned variant of [`resolve_in`] against a full graph instance.
pub fn resolve_attribute(
    template: &GraphTemplate,
    instance: &GraphInstance,
    element: ElementRef,
    attr: &str,
) -> Result<Vec<Value>, ModelError> {
    resolve_in(template.schema(element.class()), instance, element, attr).map(<[Value]>::to_vec)
}

/// The element's own existence flag, ignoring endpoints.
///
/// Without an `isExists` declaration every element exists. A declared flag
/// that resolves to no values also counts as present.
pub fn exists_flag<S: ValueSource + ?Sized>(schema: &[AttributeSchema], source: &S, element: ElementRef) -> bool {
    match schema.iter().find(|a| a.name == IS_EXISTS) {
        None => true,
        Some(decl) => resolve_decl(decl, source, element).first().and_then(Value::as_bool).unwrap_or(true),
    }
}

/// Existence of a vertex, or of an edge together with both of its endpoints.
pub fn is_exists(template: &GraphTemplate, instance: &GraphInstance, element: ElementRef) -> bool {
    match element {
        ElementRef::Vertex(_) => exists_flag(template.vertex_schema(), instance, element),
        ElementRef::Edge(id) => {
            if !exists_flag(template.edge_schema(), instance, element) {
                return false;
            }
            match template.edge(id) {
                Some(e) => {
                    exists_flag(template.vertex_schema(), instance, ElementRef::Vertex(e.src))
                        && exists_flag(template.vertex_schema(), instance, ElementRef::Vertex(e.dst))
                }
                None => false,
            }
        }
    }
}
