use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::env::{downlink_rate, user_delay, Catalog, DelayModel, FapState, PopularityModel};
use crate::error::{Error, Result};
use crate::seeding::{self, Stream};

/// One content request: user `user` of F-AP `fap` asks for `content` during
/// slot `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestEvent {
    pub slot: u64,
    pub fap: usize,
    pub user: usize,
    pub content: usize,
}

/// Where a request was served from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServiceOutcome {
    Local,
    NeighborFap(usize),
    Cloud,
}

/// Per-path average delays of one slot, the D-terms of the reward.
#[derive(Debug, Clone, Copy, Default)]
pub struct SlotDelays {
    pub local: f64,
    pub neighbor: f64,
    pub cloud: f64,
}

/// The full simulated network.
pub struct World {
    pub catalog: Catalog,
    pub popularity: PopularityModel,
    pub delay: DelayModel,
    pub faps: Vec<FapState>,
    /// Precomputed downlink delay (seconds per MB) for each (fap, user).
    user_seconds_per_mb: Vec<Vec<f64>>,
    local_cdfs: Vec<Vec<f64>>,
    request_rngs: Vec<ChaCha8Rng>,
}

impl World {
    /// Assemble a world. User distances are drawn uniformly in each F-AP's
    /// coverage disc (clamped to >= 1 m) and fixed thereafter; RBs are
    /// assigned round-robin, one per user.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        catalog: Catalog,
        popularity: PopularityModel,
        delay: DelayModel,
        num_faps: usize,
        users_per_fap: usize,
        cache_capacity_mb: f64,
        num_rbs: usize,
        coverage_radius_m: f64,
        seed: u64,
    ) -> Result<Self> {
        delay.validate()?;
        if popularity.num_faps() != num_faps {
            return Err(Error::InvalidParameter("popularity model F-AP count mismatch".into()));
        }
        let f = catalog.num_contents();
        let mut faps = Vec::with_capacity(num_faps);
        let mut user_seconds_per_mb = Vec::with_capacity(num_faps);
        let mut local_cdfs = Vec::with_capacity(num_faps);
        let mut request_rngs = Vec::with_capacity(num_faps);
        for n in 0..num_faps {
            let mut topo = seeding::rng(seed, Stream::Topology, n as u64);
            let distances: Vec<f64> = (0..users_per_fap)
                .map(|_| (coverage_radius_m * topo.gen::<f64>().sqrt()).max(1.0))
                .collect();
            let rbs: Vec<usize> = (0..users_per_fap).map(|u| u % num_rbs).collect();
            let fap = FapState::new(n, cache_capacity_mb, f, users_per_fap, rbs, distances, num_rbs)?;
            let mut per_mb = Vec::with_capacity(users_per_fap);
            for u in 0..users_per_fap {
                let rate = downlink_rate(&delay, &fap, u)?;
                per_mb.push(user_delay(rate, 1.0)?);
            }
            user_seconds_per_mb.push(per_mb);
            local_cdfs.push(popularity.local_cdf(n));
            request_rngs.push(seeding::rng(seed, Stream::Requests, n as u64));
            faps.push(fap);
        }
        Ok(Self { catalog, popularity, delay, faps, user_seconds_per_mb, local_cdfs, request_rngs })
    }

    pub fn num_faps(&self) -> usize {
        self.faps.len()
    }

    /// Draw the next requested content for `(fap, user)` from the F-AP's
    /// local popularity. The request stream is independent of any policy
    /// decisions, so traces are shared across policies under one seed.
    pub fn draw_request(&mut self, slot: u64, fap: usize, user: usize) -> RequestEvent {
        let u: f64 = self.request_rngs[fap].gen();
        let cdf = &self.local_cdfs[fap];
        let content = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
        RequestEvent { slot, fap, user, content }
    }

    /// Local transmission delay of serving `content` to `(fap, user)`.
    pub fn local_delay(&self, fap: usize, user: usize, content: usize) -> f64 {
        self.user_seconds_per_mb[fap][user] * self.catalog.size_mb(content)
    }
}

/// Serve a request against the current caches: local cache first, then any
/// neighbor caching the content (deterministic tie-break: lowest fap id),
/// then the cloud, which stores everything. `neighbor_snapshot` holds the
/// slot-start cache bits of every F-AP.
pub fn serve_request(
    world: &World,
    neighbor_snapshot: &[Vec<bool>],
    event: &RequestEvent,
) -> (ServiceOutcome, f64) {
    let base = world.local_delay(event.fap, event.user, event.content);
    if world.faps[event.fap].is_cached(event.content) {
        return (ServiceOutcome::Local, base);
    }
    for (l, bits) in neighbor_snapshot.iter().enumerate() {
        if l != event.fap && bits[event.content] {
            return (ServiceOutcome::NeighborFap(l), base + world.delay.fap_to_fap_delay);
        }
    }
    (ServiceOutcome::Cloud, base + world.delay.cloud_to_fap_delay)
}

/// Immediate reward of an outcome given the slot's per-path average delays
/// and the weight simplex (zeta1, zeta2, zeta3).
pub fn reward(outcome: ServiceOutcome, delays: SlotDelays, zeta: [f64; 3]) -> Result<f64> {
    let sum: f64 = zeta.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || zeta.iter().any(|&z| z < 0.0) {
        return Err(Error::WeightSimplex(zeta));
    }
    let r = match outcome {
        ServiceOutcome::Local => -zeta[0] * delays.local,
        ServiceOutcome::NeighborFap(_) => -(zeta[1] * delays.neighbor + zeta[0] * delays.local),
        ServiceOutcome::Cloud => -(zeta[2] * delays.cloud + zeta[0] * delays.local),
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{apply_cache_update, build_popularity};
    use approx::assert_abs_diff_eq;

    fn small_world(num_faps: usize) -> World {
        let catalog = Catalog::uniform(10, 1.0).unwrap();
        let pop = build_popularity(&catalog, num_faps, 0.8, 0.1, 0.0, 1).unwrap();
        let delay = DelayModel {
            rb_bandwidth: 20.0e6,
            transmit_power: 1.0,
            noise_density: 10f64.powf(-20.4),
            interference: 0.0,
            fap_to_fap_delay: 0.002,
            cloud_to_fap_delay: 0.010,
            pathloss_exponent: 3.0,
        };
        World::new(catalog, pop, delay, num_faps, 2, 3.0, 4, 100.0, 1).unwrap()
    }

    fn snapshot(w: &World) -> Vec<Vec<bool>> {
        w.faps.iter().map(|f| f.cache_bits().to_vec()).collect()
    }

    #[test]
    fn lookup_order_local_then_lowest_neighbor_then_cloud() {
        let mut w = small_world(8);
        let sizes: Vec<f64> = (0..10).map(|f| w.catalog.size_mb(f)).collect();
        apply_cache_update(&mut w.faps[3], &sizes, 5, None).unwrap();
        apply_cache_update(&mut w.faps[7], &sizes, 5, None).unwrap();
        let ev = RequestEvent { slot: 0, fap: 0, user: 0, content: 5 };
        let snap = snapshot(&w);
        let (outcome, d) = serve_request(&w, &snap, &ev);
        assert_eq!(outcome, ServiceOutcome::NeighborFap(3));
        assert_abs_diff_eq!(d, w.local_delay(0, 0, 5) + 0.002, epsilon = 1e-12);

        apply_cache_update(&mut w.faps[0], &sizes, 5, None).unwrap();
        let snap = snapshot(&w);
        let (outcome, d) = serve_request(&w, &snap, &ev);
        assert_eq!(outcome, ServiceOutcome::Local);
        assert_abs_diff_eq!(d, w.local_delay(0, 0, 5), epsilon = 1e-12);

        let ev9 = RequestEvent { slot: 0, fap: 0, user: 0, content: 9 };
        let (outcome, d) = serve_request(&w, &snap, &ev9);
        assert_eq!(outcome, ServiceOutcome::Cloud);
        assert_abs_diff_eq!(d, w.local_delay(0, 0, 9) + 0.010, epsilon = 1e-12);
    }

    #[test]
    fn serve_request_is_pure() {
        let w = small_world(3);
        let snap = snapshot(&w);
        let ev = RequestEvent { slot: 1, fap: 1, user: 1, content: 2 };
        assert_eq!(serve_request(&w, &snap, &ev), serve_request(&w, &snap, &ev));
    }

    #[test]
    fn reward_branches_and_ordering() {
        let zeta = [0.1, 0.2, 0.7];
        let d = SlotDelays { local: 0.1, neighbor: 0.102, cloud: 0.110 };
        let local = reward(ServiceOutcome::Local, d, zeta).unwrap();
        assert_abs_diff_eq!(local, -0.01, epsilon = 1e-12);
        let nb = reward(ServiceOutcome::NeighborFap(2), d, zeta).unwrap();
        let cloud = reward(ServiceOutcome::Cloud, d, zeta).unwrap();
        assert!(cloud <= nb && nb <= local, "reward ordering cloud <= neighbor <= local");
        assert!(local <= 0.0 && nb <= 0.0 && cloud <= 0.0);
    }

    #[test]
    fn reward_rejects_bad_weights() {
        let d = SlotDelays::default();
        assert!(reward(ServiceOutcome::Local, d, [0.5, 0.2, 0.2]).is_err());
        assert!(reward(ServiceOutcome::Local, d, [1.2, -0.1, -0.1]).is_err());
    }

    #[test]
    fn request_traces_are_seed_deterministic() {
        let mut a = small_world(2);
        let mut b = small_world(2);
        for t in 0..50 {
            assert_eq!(a.draw_request(t, 0, 0), b.draw_request(t, 0, 0));
            assert_eq!(a.draw_request(t, 1, 1), b.draw_request(t, 1, 1));
        }
    }
}
