use crate::error::{Error, Result};

/// One F-AP: cache contents, capacity, served users and their RB
/// assignments. The cache is content-indexed; "slot i" means the i-th
/// cached content in ascending content id, so the slot order is a pure
/// function of the cache bits.
#[derive(Debug, Clone)]
pub struct FapState {
    pub fap_id: usize,
    capacity_mb: f64,
    cached: Vec<bool>,
    used_mb: f64,
    num_users: usize,
    rb_index: Vec<usize>,
    distance_m: Vec<f64>,
    num_rbs: usize,
}

impl FapState {
    pub fn new(
        fap_id: usize,
        capacity_mb: f64,
        num_contents: usize,
        num_users: usize,
        rb_index: Vec<usize>,
        distance_m: Vec<f64>,
        num_rbs: usize,
    ) -> Result<Self> {
        if num_users == 0 {
            return Err(Error::InvalidParameter("F-AP needs at least one user".into()));
        }
        if rb_index.len() != num_users || distance_m.len() != num_users {
            return Err(Error::InvalidParameter("per-user vectors must have one entry per user".into()));
        }
        if rb_index.iter().any(|&m| m >= num_rbs) {
            return Err(Error::MalformedRbVector { user: 0 });
        }
        Ok(Self {
            fap_id,
            capacity_mb,
            cached: vec![false; num_contents],
            used_mb: 0.0,
            num_users,
            rb_index,
            distance_m,
            num_rbs,
        })
    }

    pub fn capacity_mb(&self) -> f64 {
        self.capacity_mb
    }

    pub fn used_mb(&self) -> f64 {
        self.used_mb
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_rbs(&self) -> usize {
        self.num_rbs
    }

    pub fn is_cached(&self, content: usize) -> bool {
        self.cached[content]
    }

    pub fn cache_bits(&self) -> &[bool] {
        &self.cached
    }

    /// Cached content ids in ascending order; index = cache slot.
    pub fn cached_ids(&self) -> Vec<usize> {
        (0..self.cached.len()).filter(|&f| self.cached[f]).collect()
    }

    pub fn occupancy(&self) -> usize {
        self.cached.iter().filter(|&&b| b).count()
    }

    /// Whether `size_mb` more megabytes fit without eviction.
    pub fn has_room(&self, size_mb: f64) -> bool {
        self.used_mb + size_mb <= self.capacity_mb + 1e-9
    }

    pub fn rb_of_user(&self, user: usize) -> usize {
        self.rb_index[user]
    }

    pub fn distance_to_user(&self, user: usize) -> f64 {
        self.distance_m[user]
    }

    /// Validate the user's one-hot RB vector.
    pub fn check_rb(&self, user: usize) -> Result<()> {
        if user >= self.num_users || self.rb_index[user] >= self.num_rbs {
            return Err(Error::MalformedRbVector { user });
        }
        Ok(())
    }
}

/// Insert the requested content, optionally evicting another, preserving
/// the capacity invariant. `evict = None` on a full cache is the explicit
/// no-op action and leaves the cache unchanged.
pub fn apply_cache_update(
    fap: &mut FapState,
    sizes_mb: &[f64],
    requested: usize,
    evict: Option<usize>,
) -> Result<()> {
    if fap.cached[requested] {
        return Err(Error::CacheUpdate(format!("content {requested} already cached")));
    }
    let size = sizes_mb[requested];
    match evict {
        None => {
            if !fap.has_room(size) {
                // No-op action on a full cache.
                return Ok(());
            }
            fap.cached[requested] = true;
            fap.used_mb += size;
        }
        Some(victim) => {
            if !fap.cached[victim] {
                return Err(Error::CacheUpdate(format!("evict target {victim} not cached")));
            }
            fap.cached[victim] = false;
            fap.used_mb -= sizes_mb[victim];
            if !fap.has_room(size) {
                // Revert; caller asked for an impossible swap.
                fap.cached[victim] = true;
                fap.used_mb += sizes_mb[victim];
                return Err(Error::CacheUpdate("replacement exceeds capacity".into()));
            }
            fap.cached[requested] = true;
            fap.used_mb += size;
        }
    }
    debug_assert!(fap.used_mb <= fap.capacity_mb + 1e-9);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fap(capacity: f64, contents: usize) -> FapState {
        FapState::new(0, capacity, contents, 2, vec![0, 1], vec![50.0, 80.0], 4).unwrap()
    }

    #[test]
    fn insert_when_not_full() {
        let sizes = vec![1.0; 5];
        let mut f = fap(2.0, 5);
        apply_cache_update(&mut f, &sizes, 3, None).unwrap();
        assert!(f.is_cached(3));
        assert_eq!(f.used_mb(), 1.0);
    }

    #[test]
    fn noop_on_full_cache_leaves_cache_unchanged() {
        let sizes = vec![1.0; 5];
        let mut f = fap(2.0, 5);
        apply_cache_update(&mut f, &sizes, 0, None).unwrap();
        apply_cache_update(&mut f, &sizes, 1, None).unwrap();
        let before = f.cache_bits().to_vec();
        apply_cache_update(&mut f, &sizes, 4, None).unwrap();
        assert_eq!(f.cache_bits(), &before[..]);
    }

    #[test]
    fn replacement_preserves_capacity() {
        let sizes = vec![1.0; 5];
        let mut f = fap(2.0, 5);
        apply_cache_update(&mut f, &sizes, 0, None).unwrap();
        apply_cache_update(&mut f, &sizes, 1, None).unwrap();
        apply_cache_update(&mut f, &sizes, 4, Some(0)).unwrap();
        assert!(!f.is_cached(0));
        assert!(f.is_cached(4));
        assert_eq!(f.used_mb(), 2.0);
        assert_eq!(f.cached_ids(), vec![1, 4]);
    }

    #[test]
    fn evicting_uncached_content_fails() {
        let sizes = vec![1.0; 5];
        let mut f = fap(2.0, 5);
        apply_cache_update(&mut f, &sizes, 0, None).unwrap();
        assert!(apply_cache_update(&mut f, &sizes, 1, Some(3)).is_err());
    }

    #[test]
    fn oversized_swap_is_rejected_and_reverted() {
        let sizes = vec![1.0, 5.0];
        let mut f = fap(1.0, 2);
        apply_cache_update(&mut f, &sizes, 0, None).unwrap();
        assert!(apply_cache_update(&mut f, &sizes, 1, Some(0)).is_err());
        assert!(f.is_cached(0));
        assert_eq!(f.used_mb(), 1.0);
    }
}
