use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::error::{Error, Result};

/// The content library. `rank[f]` is the 1-based global popularity rank of
/// content `f` (rank 1 = most popular); it is a bijection on `1..=F`.
#[derive(Debug, Clone)]
pub struct Catalog {
    sizes_mb: Vec<f64>,
    rank: Vec<usize>,
}

impl Catalog {
    pub fn uniform(num_contents: usize, size_mb: f64) -> Result<Self> {
        if num_contents == 0 {
            return Err(Error::InvalidParameter("catalog needs at least one content".into()));
        }
        if size_mb <= 0.0 {
            return Err(Error::InvalidParameter("content size must be positive".into()));
        }
        Ok(Self {
            sizes_mb: vec![size_mb; num_contents],
            rank: (1..=num_contents).collect(),
        })
    }

    pub fn with_rank(sizes_mb: Vec<f64>, rank: Vec<usize>) -> Result<Self> {
        if sizes_mb.is_empty() || sizes_mb.iter().any(|&s| s <= 0.0) {
            return Err(Error::InvalidParameter("content sizes must be positive".into()));
        }
        let f = sizes_mb.len();
        let mut seen = vec![false; f + 1];
        if rank.len() != f {
            return Err(Error::InvalidParameter("rank length mismatch".into()));
        }
        for &r in &rank {
            if r == 0 || r > f || seen[r] {
                return Err(Error::InvalidParameter("rank must be a bijection on 1..=F".into()));
            }
            seen[r] = true;
        }
        Ok(Self { sizes_mb, rank })
    }

    pub fn num_contents(&self) -> usize {
        self.sizes_mb.len()
    }

    pub fn size_mb(&self, content: usize) -> f64 {
        self.sizes_mb[content]
    }

    pub fn rank(&self) -> &[usize] {
        &self.rank
    }
}

/// Mandelbrot-Zipf request popularity: a global distribution plus one
/// per-F-AP local distribution, with the global equal to the mean of the
/// locals.
#[derive(Debug, Clone)]
pub struct PopularityModel {
    pub skewness: f64,
    pub plateau: f64,
    global: Vec<f64>,
    local: Vec<Vec<f64>>,
}

fn zipf_weights(rank: &[usize], eta: f64, lambda: f64) -> Vec<f64> {
    let mut w: Vec<f64> = rank.iter().map(|&r| (r as f64 + lambda).powf(-eta)).collect();
    let z: f64 = w.iter().sum();
    for v in &mut w {
        *v /= z;
    }
    w
}

/// Build the M-Zipf popularity model.
///
/// Each F-AP's local rank starts from the global rank; a `shuffle_fraction`
/// of rank positions is then permuted with a per-F-AP seeded shuffle, which
/// controls how non-IID the local request distributions are
/// (`shuffle_fraction = 0` makes every F-AP identical). The global
/// distribution is recomputed as the mean of the locals so the stated
/// relation between global and local popularity holds exactly.
pub fn build_popularity(
    catalog: &Catalog,
    num_faps: usize,
    eta: f64,
    lambda: f64,
    shuffle_fraction: f64,
    seed: u64,
) -> Result<PopularityModel> {
    if num_faps == 0 {
        return Err(Error::InvalidParameter("need at least one F-AP".into()));
    }
    if eta < 0.0 || lambda < 0.0 {
        return Err(Error::InvalidParameter("eta and lambda must be non-negative".into()));
    }
    if !(0.0..=1.0).contains(&shuffle_fraction) {
        return Err(Error::InvalidParameter("shuffle fraction must lie in [0,1]".into()));
    }
    let f = catalog.num_contents();
    let mut local = Vec::with_capacity(num_faps);
    for n in 0..num_faps {
        let mut rank = catalog.rank().to_vec();
        let num_shuffled = (shuffle_fraction * f as f64).floor() as usize;
        if num_shuffled >= 2 {
            let mut rng = ChaCha8Rng::seed_from_u64(
                crate::seeding::derive(seed, crate::seeding::Stream::Popularity, n as u64),
            );
            let mut positions: Vec<usize> = (0..f).collect();
            positions.shuffle(&mut rng);
            positions.truncate(num_shuffled);
            let mut values: Vec<usize> = positions.iter().map(|&i| rank[i]).collect();
            values.shuffle(&mut rng);
            for (&i, &v) in positions.iter().zip(values.iter()) {
                rank[i] = v;
            }
        }
        local.push(zipf_weights(&rank, eta, lambda));
    }
    let mut global = vec![0.0; f];
    for row in &local {
        for (g, &p) in global.iter_mut().zip(row.iter()) {
            *g += p;
        }
    }
    for g in &mut global {
        *g /= num_faps as f64;
    }
    Ok(PopularityModel { skewness: eta, plateau: lambda, global, local })
}

impl PopularityModel {
    pub fn global(&self) -> &[f64] {
        &self.global
    }

    pub fn local(&self, fap: usize) -> &[f64] {
        &self.local[fap]
    }

    pub fn num_faps(&self) -> usize {
        self.local.len()
    }

    /// Cumulative distribution of one F-AP's local popularity, for
    /// inverse-CDF sampling.
    pub fn local_cdf(&self, fap: usize) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(self.local[fap].len());
        for &p in &self.local[fap] {
            acc += p;
            cdf.push(acc);
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        cdf
    }
}
