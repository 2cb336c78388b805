//! Record lists carried in message payloads.

use crate::engine::AppError;
use crate::store::codec::{ByteReader, ByteWriter, DecodeError};

pub(crate) fn encode<T>(items: &[T], mut put: impl FnMut(&mut ByteWriter, &T)) -> Vec<u8> {
    let mut w = ByteWriter::default();
    w.len(items.len());
    for it in items {
        put(&mut w, it);
    }
    w.buf
}

pub(crate) fn decode<T>(
    payload: &[u8],
    mut get: impl FnMut(&mut ByteReader<'_>) -> Result<T, DecodeError>,
) -> Result<Vec<T>, AppError> {
    let mut r = ByteReader::new(payload);
    let mut run = |r: &mut ByteReader<'_>| -> Result<Vec<T>, DecodeError> {
        let n = r.len()?;
        let mut out = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            out.push(get(r)?);
        }
        r.finish()?;
        Ok(out)
    };
    run(&mut r).map_err(|e| AppError(e.to_string()))
}
