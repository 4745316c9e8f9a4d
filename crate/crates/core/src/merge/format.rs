//! Checkpoint file layout, bit-exact:
//!
//! * 8-byte little-endian unsigned header length N
//! * N bytes of UTF-8 JSON mapping each tensor name to
//!   `{"dtype": ..., "shape": [...], "data_offsets": [begin, end)}` plus an
//!   optional `"__metadata__"` string map
//! * the raw data section; offsets are relative to its start, contiguous
//!   and non-overlapping
//!
//! This is the widely used safetensors layout, so real checkpoints load
//! without conversion. Write-then-read is byte-faithful per tensor.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde_json::{json, Value};

use super::{Checkpoint, Dtype, Tensor};
use crate::error::{io_err, Error, Result};

const METADATA_KEY: &str = "__metadata__";
// guards against absurd allocations from corrupt headers
const MAX_HEADER_BYTES: u64 = 256 * 1024 * 1024;

pub fn write_checkpoint(checkpoint: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut writer = BufWriter::new(file);
    write_checkpoint_to(checkpoint, &mut writer).map_err(io_err(path))?;
    writer.flush().map_err(io_err(path))
}

/// Serializes to any sink; tensors stream in lexicographic name order.
pub(crate) fn write_checkpoint_to(
    checkpoint: &Checkpoint,
    writer: &mut impl Write,
) -> std::io::Result<()> {
    let mut header = serde_json::Map::new();
    if !checkpoint.metadata.is_empty() {
        header.insert(METADATA_KEY.to_string(), json!(checkpoint.metadata));
    }
    let mut offset = 0usize;
    for (name, tensor) in &checkpoint.tensors {
        let end = offset + tensor.data.len();
        header.insert(
            name.clone(),
            json!({
                "dtype": tensor.dtype.as_str(),
                "shape": tensor.shape,
                "data_offsets": [offset, end],
            }),
        );
        offset = end;
    }
    let header_bytes = serde_json::to_vec(&Value::Object(header))?;
    writer.write_all(&(header_bytes.len() as u64).to_le_bytes())?;
    writer.write_all(&header_bytes)?;
    for tensor in checkpoint.tensors.values() {
        writer.write_all(&tensor.data)?;
    }
    Ok(())
}

struct HeaderEntry {
    name: String,
    dtype: Dtype,
    shape: Vec<usize>,
    begin: u64,
    end: u64,
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    read_checkpoint_from(&mut BufReader::new(file))
}

/// Streams a checkpoint from any source; tensors are read extent by
/// extent rather than buffering the whole file.
pub fn read_checkpoint_from(reader: &mut impl Read) -> Result<Checkpoint> {
    let format_err = |offset: u64, message: String| Error::CheckpointFormat { offset, message };

    let mut len_bytes = [0u8; 8];
    reader
        .read_exact(&mut len_bytes)
        .map_err(|e| format_err(0, format!("header length unreadable: {e}")))?;
    let header_len = u64::from_le_bytes(len_bytes);
    if header_len > MAX_HEADER_BYTES {
        return Err(format_err(
            0,
            format!("header length {header_len} is implausible"),
        ));
    }

    let mut header_bytes = vec![0u8; header_len as usize];
    reader
        .read_exact(&mut header_bytes)
        .map_err(|e| format_err(8, format!("header truncated: {e}")))?;
    let header: Value = serde_json::from_slice(&header_bytes)
        .map_err(|e| format_err(8, format!("header is not valid JSON: {e}")))?;
    let object = header
        .as_object()
        .ok_or_else(|| format_err(8, "header is not a JSON object".into()))?;

    let mut checkpoint = Checkpoint::default();
    let mut entries = Vec::new();
    for (name, value) in object {
        if name == METADATA_KEY {
            let map = value
                .as_object()
                .ok_or_else(|| format_err(8, format!("{METADATA_KEY} is not an object")))?;
            for (k, v) in map {
                let v = v.as_str().ok_or_else(|| {
                    format_err(8, format!("metadata value for {k:?} is not a string"))
                })?;
                checkpoint.metadata.insert(k.clone(), v.to_string());
            }
            continue;
        }
        entries.push(parse_entry(name, value).map_err(|message| format_err(8, message))?);
    }

    // offsets must tile the data section exactly: sorted, gapless, from 0
    entries.sort_by_key(|e| (e.begin, e.end));
    let mut expected = 0u64;
    for entry in &entries {
        if entry.begin != expected {
            return Err(format_err(
                8 + header_len + expected,
                format!(
                    "tensor {:?} extent [{}, {}) overlaps or leaves a gap (expected begin {})",
                    entry.name, entry.begin, entry.end, expected
                ),
            ));
        }
        expected = entry.end;
    }

    for entry in entries {
        let mut data = vec![0u8; (entry.end - entry.begin) as usize];
        reader.read_exact(&mut data).map_err(|e| {
            format_err(
                8 + header_len + entry.begin,
                format!("data for tensor {:?} truncated: {e}", entry.name),
            )
        })?;
        let tensor = Tensor {
            name: entry.name,
            dtype: entry.dtype,
            shape: entry.shape,
            data,
        };
        tensor
            .validate()
            .map_err(|e| format_err(8, e.to_string()))?;
        checkpoint.insert(tensor);
    }

    let mut trailing = [0u8; 1];
    if reader
        .read(&mut trailing)
        .map_err(|e| format_err(8 + header_len + expected, e.to_string()))?
        != 0
    {
        return Err(format_err(
            8 + header_len + expected,
            "trailing bytes after the data section".into(),
        ));
    }
    Ok(checkpoint)
}

fn parse_entry(name: &str, value: &Value) -> std::result::Result<HeaderEntry, String> {
    let object = value
        .as_object()
        .ok_or_else(|| format!("tensor {name:?} entry is not an object"))?;
    let dtype: Dtype = object
        .get("dtype")
        .and_then(Value::as_str)
        .ok_or_else(|| format!("tensor {name:?} lacks a dtype string"))?
        .parse()
        .map_err(|e: Error| e.to_string())?;
    let shape = object
        .get("shape")
        .and_then(Value::as_array)
        .ok_or_else(|| format!("tensor {name:?} lacks a shape array"))?
        .iter()
        .map(|v| v.as_u64().map(|d| d as usize))
        .collect::<Option<Vec<usize>>>()
        .ok_or_else(|| format!("tensor {name:?} shape holds a non-integer"))?;
    let offsets = object
        .get("data_offsets")
        .and_then(Value::as_array)
        .ok_or_else(|| format!("tensor {name:?} lacks data_offsets"))?;
    let (begin, end) = match (
        offsets.first().and_then(Value::as_u64),
        offsets.get(1).and_then(Value::as_u64),
        offsets.len(),
    ) {
        (Some(b), Some(e), 2) => (b, e),
        _ => {
            return Err(format!(
                "tensor {name:?} data_offsets is not a [begin, end] pair"
            ))
        }
    };
    if end < begin {
        return Err(format!("tensor {name:?} extent ends before it begins"));
    }
    Ok(HeaderEntry {
        name: name.to_string(),
        dtype,
        shape,
        begin,
        end,
    })
}
