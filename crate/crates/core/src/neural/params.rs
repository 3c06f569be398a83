use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One dense layer's parameters. Weights are stored `(in_dim, out_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

impl Layer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { weights: Array2::zeros((in_dim, out_dim)), biases: Array1::zeros(out_dim) }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Weights then biases, pooled as one flat value stream.
    pub fn flat_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.weights.iter().copied().collect();
        v.extend(self.biases.iter().copied());
        v
    }

    pub fn set_flat_values(&mut self, values: &[f64]) -> Result<()> {
        let nw = self.weights.len();
        if values.len() != nw + self.biases.len() {
            return Err(Error::ShapeMismatch("flat value count does not match layer".into()));
        }
        for (dst, &src) in self.weights.iter_mut().zip(values[..nw].iter()) {
            *dst = src;
        }
        for (dst, &src) in self.biases.iter_mut().zip(values[nw..].iter()) {
            *dst = src;
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// A neural model as an ordered list of layers, supporting elementwise
/// add/subtract/scale and per-layer iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayeredParams {
    pub layers: Vec<Layer>,
}

#[derive(Serialize, Deserialize)]
struct WireHeader {
    dims: Vec<(usize, usize)>,
}

impl LayeredParams {
    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Layer::zeros(l.in_dim(), l.out_dim()))
                .collect(),
        }
    }

    pub fn conformable(&self, other: &Self) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(other.layers.iter())
                .all(|(a, b)| a.in_dim() == b.in_dim() && a.out_dim() == b.out_dim())
    }

    fn check_conformable(&self, other: &Self) -> Result<()> {
        if !self.conformable(other) {
            return Err(Error::ShapeMismatch("layered parameters are not conformable".into()));
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_conformable(other)?;
        for (a, b) in self.layers.iter_mut().zip(other.layers.iter()) {
            a.weights += &b.weights;
            a.biases += &b.biases;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_conformable(other)?;
        let layers = self
            .layers
            .iter()
            .zip(other.layers.iter())
            .map(|(a, b)| Layer { weights: &a.weights - &b.weights, biases: &a.biases - &b.biases })
            .collect();
        Ok(Self { layers })
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights *= factor;
            l.biases *= factor;
        }
    }

    /// `self -= rate * grad`, the SGD update.
    pub fn step_assign(&mut self, grad: &Self, rate: f64) -> Result<()> {
        self.check_conformable(grad)?;
        for (p, g) in self.layers.iter_mut().zip(grad.layers.iter()) {
            p.weights.scaled_add(-rate, &g.weights);
            p.biases.scaled_add(-rate, &g.biases);
        }
        Ok(())
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| {
                l.weights.iter().map(|v| v * v).sum::<f64>()
                    + l.biases.iter().map(|v| v * v).sum::<f64>()
            })
            .sum()
    }

    pub fn dims(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.in_dim(), l.out_dim())).collect()
    }

    /// Serialize as a JSON header (layer dims, order) followed by a flat
    /// little-endian 64-bit float stream.
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&WireHeader { dims: self.dims() }).expect("header");
        let mut out = Vec::with_capacity(8 + header.len() + 8 * self.param_count());
        out.extend_from_slice(b"LPAR");
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for layer in &self.layers {
            for v in layer.flat_values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let err = |m: &str| Error::Codec(m.to_string());
        if bytes.len() < 8 || &bytes[..4] != b"LPAR" {
            return Err(err("bad magic"));
        }
        let hlen = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let header: WireHeader = serde_json::from_slice(
            bytes.get(8..8 + hlen).ok_or_else(|| err("truncated header"))?,
        )
        .map_err(|e| Error::Codec(e.to_string()))?;
        let mut offset = 8 + hlen;
        let mut layers = Vec::with_capacity(header.dims.len());
        for (in_dim, out_dim) in header.dims {
            let count = in_dim * out_dim + out_dim;
            let end = offset + 8 * count;
            let chunk = bytes.get(offset..end).ok_or_else(|| err("truncated payload"))?;
            let values: Vec<f64> = chunk
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let mut layer = Layer::zeros(in_dim, out_dim);
            layer.set_flat_values(&values)?;
            layers.push(layer);
            offset = end;
        }
        if offset != bytes.len() {
            return Err(err("trailing bytes"));
        }
        Ok(Self { layers })
    }

    /// FNV-1a over the serialized bytes; stable across reruns.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.to_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}
