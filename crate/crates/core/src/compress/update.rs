use serde::{Deserialize, Serialize};

use crate::compress::{index_bits, kmeans_quantize, Codebook};
use crate::error::{Error, Result};
use crate::neural::{Layer, LayeredParams};

/// Bits per raw parameter used in upload accounting.
pub const DEFAULT_BIT_WIDTH: u32 = 32;

/// Per-layer sensitivity: mean absolute parameter change, weights and
/// biases pooled. `include_biases = false` restricts the mean to weights.
pub fn layer_sensitivity(
    before: &LayeredParams,
    after: &LayeredParams,
    include_biases: bool,
) -> Result<Vec<f64>> {
    let delta = after.sub(before)?;
    Ok(delta
        .layers
        .iter()
        .map(|l| {
            let mut sum: f64 = l.weights.iter().map(|v| v.abs()).sum();
            let mut count = l.weights.len();
            if include_biases {
                sum += l.biases.iter().map(|v| v.abs()).sum::<f64>();
                count += l.biases.len();
            }
            sum / count as f64
        })
        .collect())
}

/// Indices (ascending) of the `ceil(keep_fraction * L)` most sensitive
/// layers; sensitivity ties keep the lower layer index first.
pub fn select_layers(sensitivity: &[f64], keep_fraction: f64) -> Result<Vec<usize>> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidParameter("keep fraction must lie in (0,1]".into()));
    }
    let l = sensitivity.len();
    let kept = (keep_fraction * l as f64).ceil() as usize;
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| {
        sensitivity[b].partial_cmp(&sensitivity[a]).unwrap().then(a.cmp(&b))
    });
    let mut keep: Vec<usize> = order[..kept].to_vec();
    keep.sort_unstable();
    Ok(keep)
}

/// One layer of a quantized update: either a codebook or nothing.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerEntry {
    Kept(Codebook),
    Dropped,
}

/// A pruned, quantized model delta plus the metadata the server needs to
/// weight and decode it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedUpdate {
    pub dims: Vec<(usize, usize)>,
    pub entries: Vec<LayerEntry>,
    pub dataset_size: u64,
    pub bit_width: u32,
}

#[derive(Serialize, Deserialize)]
struct WireHeader {
    dims: Vec<(usize, usize)>,
    /// Codebook size per layer; 0 marks a dropped layer.
    clusters: Vec<usize>,
    bit_width: u32,
    dataset_size: u64,
}

const MAGIC: &[u8; 4] = b"QUPD";

impl QuantizedUpdate {
    fn header(&self) -> WireHeader {
        WireHeader {
            dims: self.dims.clone(),
            clusters: self
                .entries
                .iter()
                .map(|e| match e {
                    LayerEntry::Kept(cb) => cb.centroids.len(),
                    LayerEntry::Dropped => 0,
                })
                .collect(),
            bit_width: self.bit_width,
            dataset_size: self.dataset_size,
        }
    }

    /// Exact upload accounting: per kept layer `n*ceil(log2 k) + k*b` bits,
    /// plus the serialized header. Dropped layers contribute nothing.
    pub fn bit_cost(&self) -> u64 {
        let header_bits =
            8 * (8 + serde_json::to_vec(&self.header()).expect("header").len()) as u64;
        let payload: u64 = self
            .entries
            .iter()
            .map(|e| match e {
                LayerEntry::Kept(cb) => {
                    let n = cb.indices.len() as u64;
                    let k = cb.centroids.len();
                    n * index_bits(k) as u64 + k as u64 * self.bit_width as u64
                }
                LayerEntry::Dropped => 0,
            })
            .sum();
        header_bits + payload
    }

    /// Bits of the same delta uploaded raw at `bit_width` bits per value.
    pub fn raw_bits(&self) -> u64 {
        let params: u64 = self.dims.iter().map(|&(i, o)| (i * o + o) as u64).sum();
        params * self.bit_width as u64
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header()).expect("header");
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for entry in &self.entries {
            if let LayerEntry::Kept(cb) = entry {
                for &c in &cb.centroids {
                    out.extend_from_slice(&c.to_le_bytes());
                }
                out.extend_from_slice(&pack_indices(&cb.indices, index_bits(cb.centroids.len())));
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let err = |m: &str| Error::Codec(m.to_string());
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(err("bad magic"));
        }
        let hlen = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let header: WireHeader = serde_json::from_slice(
            bytes.get(8..8 + hlen).ok_or_else(|| err("truncated header"))?,
        )
        .map_err(|e| Error::Codec(e.to_string()))?;
        if header.dims.len() != header.clusters.len() {
            return Err(err("layer count mismatch in header"));
        }
        let mut offset = 8 + hlen;
        let mut entries = Vec::with_capacity(header.dims.len());
        for (&(in_dim, out_dim), &k) in header.dims.iter().zip(header.clusters.iter()) {
            if k == 0 {
                entries.push(LayerEntry::Dropped);
                continue;
            }
            let n = in_dim * out_dim + out_dim;
            if k > n {
                return Err(err("codebook larger than layer"));
            }
            let cend = offset + 8 * k;
            let centroids: Vec<f64> = bytes
                .get(offset..cend)
                .ok_or_else(|| err("truncated centroids"))?
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            offset = cend;
            let bits = index_bits(k);
            let nbytes = ((n as u64 * bits as u64) as usize + 7) / 8;
            let packed = bytes.get(offset..offset + nbytes).ok_or_else(|| err("truncated indices"))?;
            let indices = unpack_indices(packed, n, bits);
            if indices.iter().any(|&i| i >= k) {
                return Err(err("index outside codebook"));
            }
            offset += nbytes;
            entries.push(LayerEntry::Kept(Codebook { centroids, indices }));
        }
        if offset != bytes.len() {
            return Err(err("trailing bytes"));
        }
        Ok(Self {
            dims: header.dims,
            entries,
            dataset_size: header.dataset_size,
            bit_width: header.bit_width,
        })
    }
}

/// LSB-first bit packing at `bits` per index; `bits = 0` packs nothing.
fn pack_indices(indices: &[usize], bits: u32) -> Vec<u8> {
    let mut out = vec![0u8; ((indices.len() as u64 * bits as u64) as usize + 7) / 8];
    let mut pos = 0usize;
    for &idx in indices {
        for b in 0..bits {
            if idx >> b & 1 == 1 {
                out[pos / 8] |= 1 << (pos % 8);
            }
            pos += 1;
        }
    }
    out
}

fn unpack_indices(packed: &[u8], n: usize, bits: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let mut pos = 0usize;
    for _ in 0..n {
        let mut v = 0usize;
        for b in 0..bits {
            if packed[pos / 8] >> (pos % 8) & 1 == 1 {
                v |= 1 << b;
            }
            pos += 1;
        }
        out.push(v);
    }
    out
}

/// Prune-and-quantize a model delta `after - before`: the most sensitive
/// `ceil(keep_fraction * L)` layers are k-means coded (codebook size capped
/// at the layer's parameter count), the rest dropped.
pub fn compress(
    before: &LayeredParams,
    after: &LayeredParams,
    keep_fraction: f64,
    clusters: usize,
    dataset_size: u64,
) -> Result<QuantizedUpdate> {
    if clusters < 1 {
        return Err(Error::InvalidParameter("cluster count must be at least 1".into()));
    }
    let delta = after.sub(before)?;
    let sens = layer_sensitivity(before, after, true)?;
    let keep = select_layers(&sens, keep_fraction)?;
    let mut entries = Vec::with_capacity(delta.layers.len());
    for (i, layer) in delta.layers.iter().enumerate() {
        if keep.binary_search(&i).is_ok() {
            let values = layer.flat_values();
            let k = clusters.min(values.len());
            entries.push(LayerEntry::Kept(kmeans_quantize(&values, k)?));
        } else {
            entries.push(LayerEntry::Dropped);
        }
    }
    Ok(QuantizedUpdate {
        dims: delta.dims(),
        entries,
        dataset_size,
        bit_width: DEFAULT_BIT_WIDTH,
    })
}

/// Server-side inverse: kept layers decode through their codebooks, dropped
/// layers come back as exact zeros.
pub fn decode(update: &QuantizedUpdate, reference: &LayeredParams) -> Result<LayeredParams> {
    if update.dims != reference.dims() {
        return Err(Error::ShapeMismatch("update does not match reference model".into()));
    }
    let mut layers = Vec::with_capacity(update.dims.len());
    for (&(in_dim, out_dim), entry) in update.dims.iter().zip(update.entries.iter()) {
        let mut layer = Layer::zeros(in_dim, out_dim);
        if let LayerEntry::Kept(cb) = entry {
            let values = cb.decode();
            if values.len() != layer.param_count() {
                return Err(Error::ShapeMismatch("codebook does not fill its layer".into()));
            }
            layer.set_flat_values(&values)?;
        }
        layers.push(layer);
    }
    Ok(LayeredParams { layers })
}
