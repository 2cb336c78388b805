//! Line-oriented text format for collections.
//!
//! A collection directory holds `template.tsg` and `instances/*.tsi`, the
//! instance files being read in lexicographic file-name order.
//!
//! Template file:
//!
//! ```text
//! # comment
//! directed false
//! vattr <name> <type> normal
//! vattr <name> <type> default <value>
//! eattr <name> <type> constant <value>
//! V <vertex-id>
//! E <edge-id> <src-id> <dst-id>
//! ```
//!
//! Instance file:
//!
//! ```text
//! instance <start> <end>
//! VA <vertex-id> <attr> <value>
//! EA <edge-id> <attr> <value>
//! ```
//!
//! Ids are unsigned decimal integers or dotted IPv4 addresses (mapped to
//! their 32-bit value). Types are `boolean`, `integer`, `float`, `string`.
//! A value is the remainder of the line after a single separating space, so
//! strings may contain spaces. Repeating a `VA`/`EA` line for the same
//! element and attribute appends another value.

use std::fmt::Write as _;
use std::fs;
use std::net::Ipv4Addr;
use std::path::Path;

use super::graph::InstanceBuilder;
use super::{
    AttrKind, AttributeSchema, Collection, Edge, ElementClass, GraphInstance, GraphTemplate, ModelError, Value,
    ValueType,
};

pub const TEMPLATE_FILE: &str = "template.tsg";
pub const INSTANCE_DIR: &str = "instances";

fn syntax(file: &str, line: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Syntax { file: file.to_string(), line, msg: msg.into() }
}

/// Parses a decimal or dotted-quad element id.
pub fn parse_id(s: &str) -> Option<u64> {
    if let Ok(n) = s.parse::<u64>() {
        return Some(n);
    }
    s.parse::<Ipv4Addr>().ok().map(|ip| u32::from(ip) as u64)
}

/// Splits off the first whitespace-delimited token, returning it and the rest
/// (with exactly one separator removed).
fn token(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], &s[i + 1..]),
        None => (s, ""),
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

pub fn parse_template(text: &str, file: &str) -> Result<GraphTemplate, ModelError> {
    let mut directed = false;
    let (mut vs, mut es) = (Vec::new(), Vec::new());
    let (mut vertices, mut edges) = (Vec::new(), Vec::new());
    for (n, line) in lines(text) {
        let (kw, rest) = token(line);
        let id = |s: &str| parse_id(s).ok_or_else(|| syntax(file, n, format!("bad id `{s}`")));
        match kw {
            "directed" => {
                directed = match rest.trim() {
                    "true" => true,
                    "false" => false,
                    other => return Err(syntax(file, n, format!("bad flag `{other}`"))),
                }
            }
            "vattr" | "eattr" => {
                let (name, rest) = token(rest);
                let (ty, rest) = token(rest);
                let (kind, value) = token(rest);
                let ty: ValueType = ty.parse().map_err(|e: ModelError| syntax(file, n, e.to_string()))?;
                let parsed = || Value::parse(ty, value).map_err(|e| syntax(file, n, e.to_string()));
                let kind = match kind {
                    "normal" => AttrKind::Normal,
                    "default" => AttrKind::Default(parsed()?),
                    "constant" => AttrKind::Constant(parsed()?),
                    other => return Err(syntax(file, n, format!("bad attribute kind `{other}`"))),
                };
                let decl = AttributeSchema { name: name.to_string(), value_type: ty, kind };
                if kw == "vattr" {
                    vs.push(decl)
                } else {
                    es.push(decl)
                }
            }
            "V" => vertices.push(id(rest.trim())?),
            "E" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(syntax(file, n, "expected `E <id> <src> <dst>`"));
                }
                edges.push(Edge::new(id(parts[0])?, id(parts[1])?, id(parts[2])?));
            }
            other => return Err(syntax(file, n, format!("unknown directive `{other}`"))),
        }
    }
    Ok(GraphTemplate::new(directed, vertices, edges, vs, es))
}

pub fn parse_instance(text: &str, file: &str, template: &GraphTemplate) -> Result<GraphInstance, ModelError> {
    let mut builder = None;
    for (n, line) in lines(text) {
        let (kw, rest) = token(line);
        match kw {
            "instance" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let range = match parts.as_slice() {
                    [a, b] => a.parse::<i64>().ok().zip(b.parse::<i64>().ok()),
                    _ => None,
                };
                let (start, end) = range.ok_or_else(|| syntax(file, n, "expected `instance <start> <end>`"))?;
                if builder.is_some() {
                    return Err(syntax(file, n, "duplicate instance header"));
                }
                builder = Some(GraphInstance::builder(start, end));
            }
            "VA" | "EA" => {
                let b = builder.as_mut().ok_or_else(|| syntax(file, n, "values before instance header"))?;
                let class = if kw == "VA" { ElementClass::Vertex } else { ElementClass::Edge };
                let (id, rest) = token(rest);
                let (attr, value) = token(rest);
                let id = parse_id(id).ok_or_else(|| syntax(file, n, format!("bad id `{id}`")))?;
                let decl = template
                    .attribute(class, attr)
                    .ok_or_else(|| syntax(file, n, format!("no such {class} attribute `{attr}`")))?;
                let v = Value::parse(decl.value_type, value).map_err(|e| syntax(file, n, e.to_string()))?;
                b.push(class, id, attr, v);
            }
            other => return Err(syntax(file, n, format!("unknown directive `{other}`"))),
        }
    }
    builder.map(InstanceBuilder::build).ok_or_else(|| syntax(file, 0, "missing instance header"))
}

fn write_schema(out: &mut String, kw: &str, schema: &[AttributeSchema]) {
    for a in schema {
        let _ = match &a.kind {
            AttrKind::Normal => writeln!(out, "{kw} {} {} normal", a.name, a.value_type),
            AttrKind::Default(v) => writeln!(out, "{kw} {} {} default {v}", a.name, a.value_type),
            AttrKind::Constant(v) => writeln!(out, "{kw} {} {} constant {v}", a.name, a.value_type),
        };
    }
}

pub fn format_template(t: &GraphTemplate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "directed {}", t.is_directed());
    write_schema(&mut out, "vattr", t.vertex_schema());
    write_schema(&mut out, "eattr", t.edge_schema());
    for v in t.vertices() {
        let _ = writeln!(out, "V {v}");
    }
    for e in t.edges() {
        let _ = writeln!(out, "E {} {} {}", e.id, e.src, e.dst);
    }
    out
}

pub fn format_instance(inst: &GraphInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "instance {} {}", inst.start, inst.end);
    for (class, kw) in [(ElementClass::Vertex, "VA"), (ElementClass::Edge, "EA")] {
        for (attr, col) in inst.columns(class) {
            for (id, values) in col.iter() {
                for v in values {
                    let _ = writeln!(out, "{kw} {id} {attr} {v}");
                }
            }
        }
    }
    out
}

pub fn write_collection(c: &Collection, dir: &Path) -> Result<(), ModelError> {
    let inst_dir = dir.join(INSTANCE_DIR);
    fs::create_dir_all(&inst_dir)?;
    fs::write(dir.join(TEMPLATE_FILE), format_template(&c.template))?;
    for (i, inst) in c.instances.iter().enumerate() {
        fs::write(inst_dir.join(format!("{:06}.tsi", i + 1)), format_instance(inst))?;
    }
    Ok(())
}

pub fn read_collection(dir: &Path) -> Result<Collection, ModelError> {
    let tpath = dir.join(TEMPLATE_FILE);
    let template = parse_template(&fs::read_to_string(&tpath)?, &tpath.display().to_string())?;
    let mut files: Vec<_> = match fs::read_dir(dir.join(INSTANCE_DIR)) {
        Ok(rd) => {
            rd.filter_map(Result::ok).map(|e| e.path()).filter(|p| p.extension().is_some_and(|x| x == "tsi")).collect()
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    files.sort();
    let mut instances = Vec::with_capacity(files.len());
    for f in files {
        instances.push(parse_instance(&fs::read_to_string(&f)?, &f.display().to_string(), &template)?);
    }
    Ok(Collection::new(template, instances))
}
