//! Binary `vertex → (partition, sub-graph)` table.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   b"TGPM"
//! version u16 (= 1)
//! pad     u16 (= 0)
//! count   u64
//! rows    count × { vertex u64, partition u32, subgraph u64 }   sorted by vertex
//! crc32   u32 over every preceding byte
//! ```

use std::fs;
use std::path::Path;

use super::{PartitionError, PartitionId, SubgraphId};
use crate::model::VertexId;

const MAGIC: &[u8; 4] = b"TGPM";
const VERSION: u16 = 1;
const ROW: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionMapEntry {
    pub vertex: VertexId,
    pub partition: PartitionId,
    pub subgraph: SubgraphId,
}

pub fn encode_partition_map(rows: &[PartitionMapEntry]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + rows.len() * ROW + 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&0u16.to_le_bytes());
    buf.extend_from_slice(&(rows.len() as u64).to_le_bytes());
    for r in rows {
        buf.extend_from_slice(&r.vertex.to_le_bytes());
        buf.extend_from_slice(&r.partition.0.to_le_bytes());
        buf.extend_from_slice(&r.subgraph.0.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

pub fn decode_partition_map(bytes: &[u8]) -> Result<Vec<PartitionMapEntry>, PartitionError> {
    let corrupt = |m: &str| PartitionError::Corrupt(m.to_string());
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().unwrap()) {
        return Err(corrupt("checksum mismatch"));
    }
    let version = u16::from_le_bytes([body[4], body[5]]);
    if version != VERSION {
        return Err(corrupt("unsupported version"));
    }
    let count = u64::from_le_bytes(body[8..16].try_into().unwrap()) as usize;
    let rows = &body[16..];
    if rows.len() != count * ROW {
        return Err(corrupt("length mismatch"));
    }
    Ok(rows
        .chunks_exact(ROW)
        .map(|c| PartitionMapEntry {
            vertex: u64::from_le_bytes(c[0..8].try_into().unwrap()),
            partition: PartitionId(u32::from_le_bytes(c[8..12].try_into().unwrap())),
            subgraph: SubgraphId(u64::from_le_bytes(c[12..20].try_into().unwrap())),
        })
        .collect())
}

pub fn write_partition_map(path: &Path, rows: &[PartitionMapEntry]) -> Result<(), PartitionError> {
    fs::write(path, encode_partition_map(rows))?;
    Ok(())
}

pub fn read_partition_map(path: &Path) -> Result<Vec<PartitionMapEntry>, PartitionError> {
    decode_partition_map(&fs::read(path)?)
}
