//! Model-update compression: layer-sensitivity pruning, k-means weight
//! sharing with codebook encoding, and exact bit accounting for the
//! uploaded payload.

mod kmeans;
mod update;

pub use kmeans::{kmeans_quantize, Codebook};
pub use update::{
    compress, decode, layer_sensitivity, select_layers, LayerEntry, QuantizedUpdate,
    DEFAULT_BIT_WIDTH,
};

use crate::error::{Error, Result};

/// Analytic compression rate `n*b / (n*log2(k) + k*b)` for one layer of `n`
/// weights stored at `b` bits with a `k`-entry codebook. Uses the real
/// (non-integer) `log2`; `k = 1` leaves only the codebook term.
pub fn compression_rate(n: usize, b: u32, k: usize) -> Result<f64> {
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!("cluster count {k} outside 1..={n}")));
    }
    if b < 1 {
        return Err(Error::InvalidParameter("bit width must be at least 1".into()));
    }
    let (n, b, k) = (n as f64, b as f64, k as f64);
    Ok(n * b / (n * k.log2() + k * b))
}

/// Bits needed to address `k` codebook entries: `ceil(log2 k)`, zero for a
/// single shared weight.
pub fn index_bits(k: usize) -> u32 {
    debug_assert!(k >= 1);
    usize::BITS - (k - 1).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn worked_example_is_exact() {
        assert_abs_diff_eq!(compression_rate(16, 32, 4).unwrap(), 3.2, epsilon = 0.0);
    }

    #[test]
    fn single_cluster_leaves_only_codebook_bits() {
        assert_abs_diff_eq!(compression_rate(16, 32, 1).unwrap(), 16.0, epsilon = 1e-15);
    }

    #[test]
    fn direct_substitution() {
        assert_abs_diff_eq!(
            compression_rate(1024, 32, 32).unwrap(),
            32768.0 / 6144.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn domain_violations_rejected() {
        assert!(compression_rate(4, 32, 5).is_err());
        assert!(compression_rate(4, 32, 0).is_err());
        assert!(compression_rate(4, 0, 2).is_err());
    }

    #[test]
    fn index_bits_is_ceil_log2() {
        assert_eq!(index_bits(1), 0);
        assert_eq!(index_bits(2), 1);
        assert_eq!(index_bits(3), 2);
        assert_eq!(index_bits(4), 2);
        assert_eq!(index_bits(5), 3);
        assert_eq!(index_bits(64), 6);
        assert_eq!(index_bits(96), 7);
        assert_eq!(index_bits(128), 7);
        assert_eq!(index_bits(129), 8);
    }
}
