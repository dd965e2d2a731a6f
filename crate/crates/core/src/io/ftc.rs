//! Feature tensor container (`.ftc`).
//!
//! Layout: `b"FTC1"`, little-endian `u32` header length `H`, `H` bytes of
//! UTF-8 JSON `{"count":N,"dim":D,"labels":[...]}`, then `N * D`
//! little-endian `f32` values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

const MAGIC: &[u8; 4] = b"FTC1";

/// A set of equally sized embedding vectors with per-vector labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<T> {
    dim: usize,
    data: Vec<T>,
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    count: usize,
    dim: usize,
    #[serde(default)]
    labels: Vec<String>,
}

impl<T: Real> FeatureSet<T> {
    pub fn new(dim: usize, vectors: Vec<Vec<T>>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != vectors.len() {
            return Err(Error::SizeMismatch(format!(
                "{} labels for {} vectors",
                labels.len(),
                vectors.len()
            )));
        }
        let mut data = Vec::with_capacity(dim * vectors.len());
        for (i, v) in vectors.into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::SizeMismatch(format!("vector {i} has length {} not {dim}", v.len())));
            }
            data.extend(v);
        }
        Self::from_flat(dim, data, labels)
    }

    /// Labels each vector with its index.
    pub fn unlabeled(dim: usize, vectors: Vec<Vec<T>>) -> Result<Self> {
        let labels = (0..vectors.len()).map(|i| i.to_string()).collect();
        Self::new(dim, vectors, labels)
    }

    /// Builds from a row-major `count x dim` buffer.
    pub fn from_flat(dim: usize, data: Vec<T>, labels: Vec<String>) -> Result<Self> {
        if dim == 0 && !labels.is_empty() {
            return Err(Error::SizeMismatch("zero-dimensional vectors".into()));
        }
        if data.len() != dim * labels.len() {
            return Err(Error::SizeMismatch(format!(
                "{} values for {} vectors of dim {dim}",
                data.len(),
                labels.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("feature value at index {i}")));
        }
        Ok(Self { dim, data, labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vector(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        // chunks_exact panics on 0; an empty set has no rows anyway
        self.data.chunks_exact(self.dim.max(1)).take(self.labels.len())
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    /// Vectors at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.vector(i));
            labels.push(self.labels[i].clone());
        }
        Self { dim: self.dim, data, labels }
    }

    /// Concatenates sets of equal dimension.
    pub fn concat<'a>(sets: impl IntoIterator<Item = &'a Self>) -> Result<Self>
    where
        T: 'a,
    {
        let mut out: Option<Self> = None;
        for s in sets {
            match &mut out {
                None => out = Some(s.clone()),
                Some(acc) => {
                    if acc.dim != s.dim {
                        return Err(Error::SizeMismatch(format!("dim {} vs {}", acc.dim, s.dim)));
                    }
                    acc.data.extend_from_slice(&s.data);
                    acc.labels.extend(s.labels.iter().cloned());
                }
            }
        }
        out.ok_or_else(|| Error::Invalid("no feature sets to concatenate".into()))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header { count: self.len(), dim: self.dim, labels: self.labels.clone() };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(8 + json.len() + self.data.len() * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for v in &self.data {
            out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        let header_len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let header_end = 8usize
            .checked_add(header_len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::SizeMismatch("header longer than file".into()))?;
        let text = std::str::from_utf8(&bytes[8..header_end])
            .map_err(|e| Error::Invalid(format!("header is not UTF-8: {e}")))?;
        let mut header: Header = crate::error::parse_json(text)?;
        if header.labels.is_empty() && header.count > 0 {
            header.labels = (0..header.count).map(|i| i.to_string()).collect();
        }
        if header.labels.len() != header.count {
            return Err(Error::SizeMismatch(format!(
                "header declares {} vectors but {} labels",
                header.count,
                header.labels.len()
            )));
        }
        let payload = &bytes[header_end..];
        let expected = header
            .count
            .checked_mul(header.dim)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::SizeMismatch("declared size overflows".into()))?;
        if payload.len() != expected {
            return Err(Error::SizeMismatch(format!(
                "payload has {} bytes, header declares {expected}",
                payload.len()
            )));
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| T::lit(f32::from_le_bytes(c.try_into().unwrap()) as f64))
            .collect();
        Self::from_flat(header.dim, data, header.labels)
    }
}

pub fn load_feature_set<T: Real>(path: impl AsRef<Path>) -> Result<FeatureSet<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    FeatureSet::from_bytes(&bytes)
}

pub fn save_feature_set<T: Real>(set: &FeatureSet<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, set.to_bytes()).map_err(|e| Error::io(path, e))
}
