//! Binary model format: `RSLM`, u32 version, u32 num_atoms, u32 layer count,
//! then per layer u32 rows, u32 cols, row-major f64 weights and f64 biases,
//! all little-endian, followed by the SHA-256 of everything before it.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nn::model::{Dense, HeuristicModel};

pub const MAGIC: &[u8; 4] = b"RSLM";
pub const MODEL_FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

pub fn model_to_bytes(model: &HeuristicModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + model.num_parameters() * 8 + DIGEST_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.num_atoms() as u32).to_le_bytes());
    out.extend_from_slice(&(model.layers.len() as u32).to_le_bytes());
    for layer in &model.layers {
        out.extend_from_slice(&(layer.outputs() as u32).to_le_bytes());
        out.extend_from_slice(&(layer.inputs() as u32).to_le_bytes());
        for w in layer.weights.iter() {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for b in layer.bias.iter() {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(digest.as_slice());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.buf.len() < n {
            return Err(Error::Checksum);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or(Error::Checksum)?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<HeuristicModel> {
    if bytes.len() < 16 + DIGEST_LEN {
        return Err(Error::Checksum);
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(Error::Checksum);
    }
    let mut r = Reader { buf: body };
    if r.take(4)? != MAGIC {
        return Err(Error::Integrity("not a model file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: version as u64,
            expected: MODEL_FORMAT_VERSION as u64,
        });
    }
    let num_atoms = r.u32()? as usize;
    let count = r.u32()? as usize;
    let mut layers = Vec::with_capacity(count.min(16));
    for _ in 0..count {
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let weights = Array2::from_shape_vec((rows, cols), r.f64s(rows * cols)?)
            .map_err(|e| Error::Integrity(e.to_string()))?;
        let bias = Array1::from(r.f64s(rows)?);
        layers.push(Dense { weights, bias });
    }
    if !r.buf.is_empty() {
        return Err(Error::Integrity("trailing bytes after last layer".into()));
    }
    HeuristicModel::from_layers(num_atoms, layers)
}

pub fn save_model(model: &HeuristicModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<HeuristicModel> {
    model_from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::model::init_model;

    #[test]
    fn round_trip_is_bit_exact() {
        let m = init_model(9, 5);
        let back = model_from_bytes(&model_to_bytes(&m)).unwrap();
        assert_eq!(m, back);
        for (a, b) in m.layers.iter().zip(&back.layers) {
            assert!(a.weights.iter().zip(b.weights.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn truncation_fails_checksum() {
        let bytes = model_to_bytes(&init_model(3, 1));
        assert!(matches!(model_from_bytes(&bytes[..bytes.len() - 9]), Err(Error::Checksum)));
        let mut flipped = bytes.clone();
        flipped[40] ^= 1;
        assert!(matches!(model_from_bytes(&flipped), Err(Error::Checksum)));
    }

    #[test]
    fn header_layout() {
        let bytes = model_to_bytes(&init_model(3, 1));
        assert_eq!(&bytes[..4], b"RSLM");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 250);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 3);
    }
}
