//! Binary model file.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        6 bytes  "ALSTM1"
//! version      u32
//! meta_len     u32, then meta_len bytes of UTF-8 JSON
//!              {variant, input_dim, hidden_dim, attention_dim, meta...}
//! n_tensors    u32
//! per tensor:  name_len u16, name UTF-8, rank u8, dims u32 * rank,
//!              then prod(dims) f64 values (IEEE-754, row-major)
//! ```

use serde::{Deserialize, Serialize};

use super::params::{ModelMeta, ModelParams, Variant};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"ALSTM1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    variant: Variant,
    input_dim: usize,
    hidden_dim: usize,
    attention_dim: Option<usize>,
    #[serde(flatten)]
    meta: ModelMeta,
}

pub fn serialize_model(m: &ModelParams) -> Vec<u8> {
    let header = Header {
        variant: m.variant,
        input_dim: m.input_dim(),
        hidden_dim: m.hidden_dim(),
        attention_dim: m.attention_dim(),
        meta: m.meta.clone(),
    };
    let meta = serde_json::to_vec(&header).expect("header serializes");
    let tensors = m.tensors();

    let mut out = Vec::with_capacity(64 + meta.len() + 8 * m.num_parameters());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta);
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in tensors {
        out.extend_from_slice(&(t.name.len() as u16).to_le_bytes());
        out.extend_from_slice(t.name.as_bytes());
        out.push(t.dims.len() as u8);
        for d in &t.dims {
            out.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        for v in t.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::UnexpectedEof)?;
        let slice = self.bytes.get(self.pos..end).ok_or(Error::UnexpectedEof)?;
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn deserialize_model(bytes: &[u8]) -> Result<ModelParams> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut r = Reader {
        bytes,
        pos: MAGIC.len(),
    };
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let meta_len = r.u32()? as usize;
    let header: Header = serde_json::from_slice(r.take(meta_len)?)
        .map_err(|e| Error::CorruptModel(format!("metadata: {e}")))?;
    if header.input_dim == 0 || header.hidden_dim == 0 {
        return Err(Error::CorruptModel("zero model dimension".into()));
    }

    let mut model = ModelParams::zeros(
        header.variant,
        header.input_dim,
        header.hidden_dim,
        header.attention_dim.unwrap_or(0),
    );
    model.meta = header.meta;
    let expected: Vec<(String, Vec<usize>)> = model
        .tensors()
        .into_iter()
        .map(|t| (t.name, t.dims))
        .collect();

    let count = r.u32()? as usize;
    if count != expected.len() {
        return Err(Error::CorruptModel(format!(
            "tensor table has {count} entries, expected {}",
            expected.len()
        )));
    }
    let mut slots = model.tensors_mut();
    for ((name, dims), slot) in expected.iter().zip(slots.iter_mut()) {
        let name_len = r.u16()? as usize;
        let got_name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| Error::CorruptModel("tensor name is not UTF-8".into()))?;
        if got_name != name {
            return Err(Error::CorruptModel(format!(
                "expected tensor '{name}', found '{got_name}'"
            )));
        }
        let rank = r.u8()? as usize;
        let got_dims = (0..rank)
            .map(|_| r.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        if &got_dims != dims {
            return Err(Error::CorruptModel(format!(
                "tensor '{name}' has dims {got_dims:?}, expected {dims:?}"
            )));
        }
        for v in slot.iter_mut() {
            *v = r.f64()?;
        }
    }
    drop(slots);
    if r.pos != bytes.len() {
        return Err(Error::CorruptModel(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    model.validate()?;
    Ok(model)
}
