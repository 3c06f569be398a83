use crate::error::{Error, Result};

/// A quantized value pool: `k` centroids plus one centroid index per
/// original value.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub centroids: Vec<f64>,
    pub indices: Vec<usize>,
}

impl Codebook {
    pub fn decode(&self) -> Vec<f64> {
        self.indices.iter().map(|&i| self.centroids[i]).collect()
    }

    pub fn sse(&self, data: &[f64]) -> f64 {
        data.iter()
            .zip(self.indices.iter())
            .map(|(&x, &i)| {
                let d = x - self.centroids[i];
                d * d
            })
            .sum()
    }
}

/// 1-D Lloyd's algorithm with centroids linearly initialized between the
/// data minimum and maximum. Runs to an assignment fixed point or 300
/// iterations; an emptied cluster is re-seeded at the point currently
/// farthest from its assigned centroid. Fully deterministic.
pub fn kmeans_quantize(data: &[f64], k: usize) -> Result<Codebook> {
    let n = data.len();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot quantize an empty array".into()));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!("cluster count {k} outside 1..={n}")));
    }
    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut centroids: Vec<f64> = if k == 1 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..k).map(|j| lo + (hi - lo) * j as f64 / (k - 1) as f64).collect()
    };

    // Sentinel start so the first assignment always counts as a change and
    // at least one centroid update runs.
    let mut indices = vec![usize::MAX; n];
    for _ in 0..300 {
        let mut changed = false;
        for (i, &x) in data.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = (x - centroids[0]).abs();
            for (j, &c) in centroids.iter().enumerate().skip(1) {
                let d = (x - c).abs();
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            if indices[i] != best {
                indices[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&x, &i) in data.iter().zip(indices.iter()) {
            sums[i] += x;
            counts[i] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j] / counts[j] as f64;
            } else {
                // Re-seed at the point farthest from its assigned centroid
                // (ties toward the lowest data index).
                let far = data
                    .iter()
                    .zip(indices.iter())
                    .enumerate()
                    .max_by(|(ia, (a, ca)), (ib, (b, cb))| {
                        let da = (**a - centroids[**ca]).abs();
                        let db = (**b - centroids[**cb]).abs();
                        da.partial_cmp(&db).unwrap().then(ib.cmp(ia))
                    })
                    .map(|(i, _)| i)
                    .unwrap();
                centroids[j] = data[far];
            }
        }
    }
    Ok(Codebook { centroids, indices })
}
