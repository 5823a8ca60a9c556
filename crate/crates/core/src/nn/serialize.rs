//! Versioned binary container shared by model weights and window archives.
//!
//! Layout: 8 magic bytes, `u32` version, `u8` kind, `u32` length plus UTF-8
//! JSON config echo, `u32` tensor count, then per tensor a `u32` rank, `u64`
//! extents and `f64` values. All integers and floats are little-endian.

use serde::{Deserialize, Serialize};

use super::model::{Model, ModelConfig};
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"BVPKIT\0\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u8)]
pub enum ContainerKind {
    ModelWeights = 1,
    WindowArchive = 2,
    GafArchive = 3,
}

impl ContainerKind {
    fn from_u8(b: u8) -> Result<Self> {
        match b {
            1 => Ok(ContainerKind::ModelWeights),
            2 => Ok(ContainerKind::WindowArchive),
            3 => Ok(ContainerKind::GafArchive),
            other => Err(Error::InvalidValue(format!(
                "unknown container kind {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub kind: ContainerKind,
    /// JSON text describing how the tensors were produced.
    pub config: String,
    pub tensors: Vec<Tensor>,
}

impl Container {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.kind as u8);
        out.extend_from_slice(&(self.config.len() as u32).to_le_bytes());
        out.extend_from_slice(self.config.as_bytes());
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for t in &self.tensors {
            out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
            for &d in t.shape() {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::InvalidValue(
                "not a bvpkit container (bad magic)".into(),
            ));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::InvalidValue(format!(
                "unsupported container version {version}"
            )));
        }
        let kind = ContainerKind::from_u8(r.take(1)?[0])?;
        let len = r.u32()? as usize;
        let config = String::from_utf8(r.take(len)?.to_vec())
            .map_err(|_| Error::InvalidValue("config echo is not UTF-8".into()))?;
        let count = r.u32()? as usize;
        let mut tensors = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let rank = r.u32()? as usize;
            let mut shape = Vec::with_capacity(rank.min(8));
            for _ in 0..rank {
                shape.push(r.u64()? as usize);
            }
            let n = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
            let n = n.ok_or_else(|| Error::InvalidValue("tensor extent overflow".into()))?;
            let raw = r.take(
                n.checked_mul(8)
                    .ok_or_else(|| Error::Truncated("tensor".into()))?,
            )?;
            let data = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            tensors.push(Tensor::new(shape, data)?);
        }
        if r.pos != bytes.len() {
            return Err(Error::InvalidValue(format!(
                "{} trailing bytes after container",
                bytes.len() - r.pos
            )));
        }
        Ok(Container {
            kind,
            config,
            tensors,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated(format!(
                "container ends at byte {}, needed {n} more",
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}

impl Model {
    /// Weights in declaration order, with the config echoed as JSON.
    pub fn to_bytes(&self) -> Vec<u8> {
        let tensors = self
            .params()
            .into_iter()
            .map(|p| Tensor::new(vec![p.len()], p.clone()).expect("non-empty parameter"))
            .collect();
        Container {
            kind: ContainerKind::ModelWeights,
            config: serde_json::to_string(self.config()).expect("config serializes"),
            tensors,
        }
        .to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let c = Container::from_bytes(bytes)?;
        if c.kind != ContainerKind::ModelWeights {
            return Err(Error::InvalidValue(format!(
                "expected model weights, found {:?}",
                c.kind
            )));
        }
        let cfg: ModelConfig = serde_json::from_str(&c.config)
            .map_err(|e| Error::InvalidValue(format!("config echo: {e}")))?;
        let mut model = Model::new(cfg)?;
        let params = model.params_mut();
        if params.len() != c.tensors.len() {
            return Err(Error::Shape {
                expected: format!("{} tensors", params.len()),
                got: c.tensors.len().to_string(),
            });
        }
        for (p, t) in params.into_iter().zip(c.tensors) {
            if p.len() != t.len() {
                return Err(Error::Shape {
                    expected: format!("{} values", p.len()),
                    got: t.len().to_string(),
                });
            }
            *p = t.into_data();
        }
        Ok(model)
    }
}
