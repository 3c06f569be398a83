use crate::error::{Error, Result};

/// Per-F-AP request bookkeeping shared by the LRU and LFU baselines.
#[derive(Debug, Clone)]
pub struct PolicyStats {
    /// Last slot at which each content was requested at this F-AP.
    last_used: Vec<u64>,
    /// Cumulative request counts per content.
    counts: Vec<u64>,
}

impl PolicyStats {
    pub fn new(num_contents: usize) -> Self {
        Self { last_used: vec![0; num_contents], counts: vec![0; num_contents] }
    }

    pub fn note_request(&mut self, content: usize, slot: u64) {
        self.last_used[content] = slot;
        self.counts[content] += 1;
    }
}

/// Least-recently-used victim among the cached contents; ties (identical
/// timestamps) break toward the lowest content id.
pub fn lru_evict(stats: &PolicyStats, cached_ids: &[usize]) -> Result<usize> {
    argmin_by_key(stats, cached_ids, |s, c| s.last_used[c])
}

/// Least-frequently-used victim; ties break toward the lowest content id.
pub fn lfu_evict(stats: &PolicyStats, cached_ids: &[usize]) -> Result<usize> {
    argmin_by_key(stats, cached_ids, |s, c| s.counts[c])
}

fn argmin_by_key(
    stats: &PolicyStats,
    cached_ids: &[usize],
    key: impl Fn(&PolicyStats, usize) -> u64,
) -> Result<usize> {
    cached_ids
        .iter()
        .copied()
        .min_by_key(|&c| (key(stats, c), c))
        .ok_or_else(|| Error::InvalidParameter("cannot evict from an empty cache".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{build_popularity, Catalog};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lru_picks_oldest_and_breaks_ties_low() {
        let mut s = PolicyStats::new(5);
        s.note_request(0, 10);
        s.note_request(2, 3);
        s.note_request(4, 7);
        assert_eq!(lru_evict(&s, &[0, 2, 4]).unwrap(), 2);
        // 1 and 3 were never requested: both timestamp 0, lowest id wins.
        assert_eq!(lru_evict(&s, &[1, 3]).unwrap(), 1);
    }

    #[test]
    fn lfu_picks_rarest_and_breaks_ties_low() {
        let mut s = PolicyStats::new(4);
        for _ in 0..5 {
            s.note_request(0, 1);
        }
        for _ in 0..2 {
            s.note_request(1, 1);
        }
        for _ in 0..2 {
            s.note_request(3, 1);
        }
        assert_eq!(lfu_evict(&s, &[0, 1, 3]).unwrap(), 1);
    }

    #[test]
    fn empty_cache_rejected() {
        let s = PolicyStats::new(3);
        assert!(lru_evict(&s, &[]).is_err());
        assert!(lfu_evict(&s, &[]).is_err());
    }

    #[test]
    fn lfu_steady_state_hit_rate_matches_top_c_mass() {
        // Under a static request distribution an LFU cache converges to
        // holding the c most popular contents, so the long-run hit rate
        // approaches the probability mass of the top c.
        let num_contents = 50;
        let capacity = 10;
        let catalog = Catalog::uniform(num_contents, 1.0).unwrap();
        let pop = build_popularity(&catalog, 1, 0.8, 0.1, 0.0, 0).unwrap();
        let probs = pop.local(0);
        let cdf: Vec<f64> = probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let expected: f64 = probs[..capacity].iter().sum();

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut stats = PolicyStats::new(num_contents);
        let mut cache: Vec<usize> = Vec::new();
        let mut hits = 0usize;
        let total = 100_000usize;
        for slot in 0..total {
            let u: f64 = rng.gen();
            let content = cdf.partition_point(|&c| c < u).min(num_contents - 1);
            stats.note_request(content, slot as u64);
            if cache.contains(&content) {
                hits += 1;
            } else if cache.len() < capacity {
                cache.push(content);
                cache.sort_unstable();
            } else {
                let victim = lfu_evict(&stats, &cache).unwrap();
                cache.retain(|&c| c != victim);
                cache.push(content);
                cache.sort_unstable();
            }
        }
        let hit_rate = hits as f64 / total as f64;
        assert!(
            (hit_rate - expected).abs() < 0.05,
            "hit rate {hit_rate} vs steady-state mass {expected}"
        );
    }
}
