//! Slice files: the unit of disk storage.
//!
//! Every slice is a single file, all integers little-endian:
//!
//! ```text
//! magic        b"TGSL"
//! version      u16        (= 1)
//! kind         u8         0 template, 1 metadata, 2 attribute
//! class        u8         0 none, 1 vertex, 2 edge
//! partition    u32
//! bin          u32
//! window       u32
//! time_start   i64        covered range [time_start, time_end)
//! time_end     i64
//! attr_len     u16, attr bytes (utf-8, empty unless attribute slice)
//! payload_len  u64, payload bytes
//! crc32        u32        over every preceding byte
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::StoreError;
use crate::model::ElementClass;
use crate::partition::PartitionId;

pub const SLICE_MAGIC: &[u8; 4] = b"TGSL";
pub const SLICE_VERSION: u16 = 1;
const FIXED_HEADER: usize = 4 + 2 + 1 + 1 + 4 + 4 + 4 + 8 + 8 + 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceKind {
    Template,
    Metadata,
    Attribute,
}

impl SliceKind {
    fn tag(self) -> u8 {
        match self {
            SliceKind::Template => 0,
            SliceKind::Metadata => 1,
            SliceKind::Attribute => 2,
        }
    }

    fn from_tag(t: u8) -> Option<Self> {
        Some(match t {
            0 => SliceKind::Template,
            1 => SliceKind::Metadata,
            2 => SliceKind::Attribute,
            _ => return None,
        })
    }
}

/// Identity of an attribute slice within one host: attribute × bin × window.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SliceId {
    pub class: ElementClass,
    pub attr: String,
    pub bin: u32,
    pub window: u32,
}

impl SliceId {
    /// Path relative to the host directory.
    pub fn rel_path(&self) -> PathBuf {
        PathBuf::from("attr")
            .join(format!("{}.{}", self.class, self.attr))
            .join(format!("bin{}.win{}.slc", self.bin, self.window))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceHeader {
    pub kind: SliceKind,
    pub class: Option<ElementClass>,
    pub partition: PartitionId,
    pub bin: u32,
    pub window: u32,
    pub time_start: i64,
    pub time_end: i64,
    pub attr: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    pub header: SliceHeader,
    pub payload: Vec<u8>,
}

impl Slice {
    pub fn encode(&self) -> Vec<u8> {
        let h = &self.header;
        let mut buf = Vec::with_capacity(FIXED_HEADER + h.attr.len() + 12 + self.payload.len());
        buf.extend_from_slice(SLICE_MAGIC);
        buf.extend_from_slice(&SLICE_VERSION.to_le_bytes());
        buf.push(h.kind.tag());
        buf.push(match h.class {
            None => 0,
            Some(ElementClass::Vertex) => 1,
            Some(ElementClass::Edge) => 2,
        });
        buf.extend_from_slice(&h.partition.0.to_le_bytes());
        buf.extend_from_slice(&h.bin.to_le_bytes());
        buf.extend_from_slice(&h.window.to_le_bytes());
        buf.extend_from_slice(&h.time_start.to_le_bytes());
        buf.extend_from_slice(&h.time_end.to_le_bytes());
        buf.extend_from_slice(&(h.attr.len() as u16).to_le_bytes());
        buf.extend_from_slice(h.attr.as_bytes());
        buf.extend_from_slice(&(self.payload.len() as u64).to_le_bytes());
        buf.extend_from_slice(&self.payload);
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn decode(bytes: &[u8], path: &Path) -> Result<Slice, StoreError> {
        let checksum = || StoreError::Checksum(path.to_path_buf());
        if bytes.len() < FIXED_HEADER + 12 {
            return Err(checksum());
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().unwrap()) {
            return Err(checksum());
        }
        let bad = |what: &str| StoreError::Malformed { path: path.to_path_buf(), what: what.to_string() };
        if &body[..4] != SLICE_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u16::from_le_bytes([body[4], body[5]]);
        if version != SLICE_VERSION {
            return Err(StoreError::Version { path: path.to_path_buf(), found: version });
        }
        let mut r = super::codec::ByteReader::new(&body[6..]);
        let err = |_| bad("truncated header");
        let kind = SliceKind::from_tag(r.u8().map_err(err)?).ok_or_else(|| bad("bad kind"))?;
        let class = match r.u8().map_err(err)? {
            0 => None,
            1 => Some(ElementClass::Vertex),
            2 => Some(ElementClass::Edge),
            _ => return Err(bad("bad element class")),
        };
        let partition = PartitionId(r.u32().map_err(err)?);
        let bin = r.u32().map_err(err)?;
        let window = r.u32().map_err(err)?;
        let time_start = r.i64().map_err(err)?;
        let time_end = r.i64().map_err(err)?;
        let attr_len = r.u16().map_err(err)? as usize;
        let attr = String::from_utf8(r.bytes(attr_len).map_err(err)?.to_vec()).map_err(|_| bad("attr not utf-8"))?;
        let payload_len = r.u64().map_err(err)? as usize;
        let payload = r.bytes(payload_len).map_err(err)?.to_vec();
        r.finish().map_err(|_| bad("trailing bytes"))?;
        Ok(Slice { header: SliceHeader { kind, class, partition, bin, window, time_start, time_end, attr }, payload })
    }
}

pub fn write_slice(slice: &Slice, path: &Path) -> Result<Vec<u8>, StoreError> {
    let bytes = slice.encode();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| StoreError::io(dir, e))?;
    }
    fs::write(path, &bytes).map_err(|e| StoreError::io(path, e))?;
    Ok(bytes)
}

pub fn read_slice(path: &Path) -> Result<(Slice, usize), StoreError> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => StoreError::CorruptDeployment(format!("missing slice {}", path.display())),
        _ => StoreError::io(path, e),
    })?;
    Ok((Slice::decode(&bytes, path)?, bytes.len()))
}
