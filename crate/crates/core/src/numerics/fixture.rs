//! Weights fixtures: an 8-byte little-endian header length, a JSON header naming
//! each tensor's shape and element offset, then the tensors as flat
//! little-endian `f32` values.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{BatchNormParams, Conv2dParams};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub shape: Vec<usize>,
    /// Offset into the data section, in `f32` elements.
    pub offset: usize,
}

impl TensorEntry {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsHeader {
    pub tensors: BTreeMap<String, TensorEntry>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightsFile {
    pub header: WeightsHeader,
    pub data: Vec<f32>,
}

impl WeightsFile {
    pub fn insert(&mut self, name: &str, shape: Vec<usize>, values: &[f64]) {
        let entry = TensorEntry {
            shape,
            offset: self.data.len(),
        };
        assert_eq!(entry.len(), values.len(), "tensor `{name}` shape/length mismatch");
        self.data.extend(values.iter().map(|&v| v as f32));
        self.header.tensors.insert(name.to_string(), entry);
    }

    pub fn tensor(&self, name: &str) -> Result<(&[usize], Vec<f64>)> {
        let e = self
            .header
            .tensors
            .get(name)
            .ok_or_else(|| Error::Fixture(format!("missing tensor `{name}`")))?;
        let slice = self
            .data
            .get(e.offset..e.offset + e.len())
            .ok_or_else(|| Error::Fixture(format!("tensor `{name}` runs past the data")))?;
        Ok((&e.shape, slice.iter().map(|&v| v as f64).collect()))
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.header.metadata.get(key).and_then(|v| v.as_f64())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header)?;
        let mut out = Vec::with_capacity(8 + header.len() + 4 * self.data.len());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let len_bytes: [u8; 8] = bytes
            .get(..8)
            .and_then(|b| b.try_into().ok())
            .ok_or_else(|| Error::Fixture("truncated header length".into()))?;
        let hlen = u64::from_le_bytes(len_bytes) as usize;
        let header_bytes = bytes
            .get(8..8 + hlen)
            .ok_or_else(|| Error::Fixture("truncated header".into()))?;
        let header: WeightsHeader = serde_json::from_slice(header_bytes)?;
        let body = &bytes[8 + hlen..];
        if !body.len().is_multiple_of(4) {
            return Err(Error::Fixture("data section is not a whole number of f32".into()));
        }
        let data: Vec<f32> = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        for (name, e) in &header.tensors {
            if e.offset + e.len() > data.len() {
                return Err(Error::Fixture(format!("tensor `{name}` runs past the data")));
            }
        }
        Ok(Self { header, data })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }
}

/// A conv layer optionally followed by batch norm, as stored in a weights fixture.
///
/// Tensor names: `conv.weight` `[c_out, c_in, k, k]`, `conv.bias` `[c_out]`,
/// `bn.weight`, `bn.bias`, `bn.running_mean`, `bn.running_var` `[c_out]`.
/// Metadata keys: `stride`, `padding`, `bn.eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvBnFixture {
    pub conv: Conv2dParams,
    pub bn: Option<BatchNormParams>,
}

impl ConvBnFixture {
    pub fn to_weights(&self) -> WeightsFile {
        let c = &self.conv;
        let mut f = WeightsFile::default();
        f.insert("conv.weight", vec![c.c_out, c.c_in, c.k, c.k], &c.weights);
        f.insert("conv.bias", vec![c.c_out], &c.bias);
        f.header.metadata.insert("stride".into(), c.stride.into());
        f.header.metadata.insert("padding".into(), c.padding.into());
        if let Some(bn) = &self.bn {
            f.insert("bn.weight", vec![c.c_out], &bn.gamma);
            f.insert("bn.bias", vec![c.c_out], &bn.beta);
            f.insert("bn.running_mean", vec![c.c_out], &bn.running_mean);
            f.insert("bn.running_var", vec![c.c_out], &bn.running_var);
            f.header.metadata.insert("bn.eps".into(), bn.eps.into());
        }
        f
    }

    pub fn from_weights(f: &WeightsFile) -> Result<Self> {
        let (shape, weights) = f.tensor("conv.weight")?;
        let [c_out, c_in, k, k2] = shape[..] else {
            return Err(Error::Fixture(format!("conv.weight has shape {shape:?}")));
        };
        if k != k2 {
            return Err(Error::Fixture("non-square kernels are not supported".into()));
        }
        let bias = match f.header.tensors.contains_key("conv.bias") {
            true => f.tensor("conv.bias")?.1,
            false => vec![0.0; c_out],
        };
        let meta_usize = |key: &str, default: usize| {
            f.header
                .metadata
                .get(key)
                .map(|v| {
                    v.as_u64()
                        .map(|u| u as usize)
                        .ok_or_else(|| Error::Fixture(format!("metadata `{key}` is not an integer")))
                })
                .unwrap_or(Ok(default))
        };
        let conv = Conv2dParams {
            c_out,
            c_in,
            k,
            weights,
            bias,
            stride: meta_usize("stride", 1)?,
            padding: meta_usize("padding", k / 2)?,
        };
        let bn = if f.header.tensors.contains_key("bn.weight") {
            let bn = BatchNormParams {
                gamma: f.tensor("bn.weight")?.1,
                beta: f.tensor("bn.bias")?.1,
                running_mean: f.tensor("bn.running_mean")?.1,
                running_var: f.tensor("bn.running_var")?.1,
                eps: f.meta_f64("bn.eps").unwrap_or(1e-5),
            };
            if bn.running_var.iter().any(|v| *v < 0.0) {
                return Err(Error::Fixture("negative running variance".into()));
            }
            Some(bn)
        } else {
            None
        };
        Ok(Self { conv, bn })
    }
}
