use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::{build_popularity, Catalog, DelayModel, World};
use crate::error::{Error, Result};
use crate::federation::FedConfig;

/// Which replacement policy drives the caches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Independent per-F-AP learners, no federation.
    Dqn,
    /// Federated learners with pruned + quantized uploads.
    Frlq,
    /// Federated learners with raw (uncompressed) uploads.
    Frl,
    /// One shared learner fed every F-AP's stream.
    Centralized,
    Lru,
    Lfu,
}

impl PolicyKind {
    pub fn is_learning(self) -> bool {
        !matches!(self, PolicyKind::Lru | PolicyKind::Lfu)
    }

    pub fn is_federated(self) -> bool {
        matches!(self, PolicyKind::Frlq | PolicyKind::Frl)
    }

    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Dqn => "dqn",
            PolicyKind::Frlq => "frlq",
            PolicyKind::Frl => "frl",
            PolicyKind::Centralized => "centralized",
            PolicyKind::Lru => "lru",
            PolicyKind::Lfu => "lfu",
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dqn" => Ok(PolicyKind::Dqn),
            "frlq" => Ok(PolicyKind::Frlq),
            "frl" => Ok(PolicyKind::Frl),
            "centralized" => Ok(PolicyKind::Centralized),
            "lru" => Ok(PolicyKind::Lru),
            "lfu" => Ok(PolicyKind::Lfu),
            other => Err(Error::Config(format!("unknown policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CatalogConfig {
    pub num_contents: usize,
    pub content_size_mb: f64,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        Self { num_contents: 200, content_size_mb: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopularityConfig {
    /// Skewness eta of the rank law.
    pub skewness: f64,
    /// Plateau lambda of the rank law.
    pub plateau: f64,
    /// Fraction of ranks locally reshuffled per F-AP (0 = identical tastes).
    pub shuffle_fraction: f64,
}

impl Default for PopularityConfig {
    fn default() -> Self {
        Self { skewness: 0.8, plateau: 0.1, shuffle_fraction: 0.2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    /// Resource-block bandwidth B, Hz.
    pub rb_bandwidth: f64,
    /// F-AP transmit power P_n, watts.
    pub transmit_power: f64,
    /// Noise power spectral density N_0, watts/Hz.
    pub noise_density: f64,
    /// Scales inter-F-AP interference `kappa * (N-1) * P * gain(radius)`.
    pub interference_coupling: f64,
    /// d^a: F-AP to F-AP forwarding delay, seconds.
    pub fap_to_fap_delay: f64,
    /// d^b: cloud to F-AP delay, seconds.
    pub cloud_to_fap_delay: f64,
    pub pathloss_exponent: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            rb_bandwidth: 20.0e6,
            transmit_power: 1.0,
            // -174 dBm/Hz.
            noise_density: 10f64.powf(-20.4),
            interference_coupling: 1.0,
            fap_to_fap_delay: 0.002,
            cloud_to_fap_delay: 0.010,
            pathloss_exponent: 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub num_faps: usize,
    pub users_per_fap: usize,
    pub cache_capacity_mb: f64,
    pub coverage_radius_m: f64,
    /// 0 means one RB per user.
    pub num_rbs: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            num_faps: 10,
            users_per_fap: 10,
            cache_capacity_mb: 20.0,
            coverage_radius_m: 250.0,
            num_rbs: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    /// (zeta1, zeta2, zeta3) over local / F-AP / cloud delay terms.
    pub zeta: [f64; 3],
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { zeta: [0.1, 0.2, 0.7] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnSection {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub discount: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Target-network copy period M, in gradient steps.
    pub sync_period: u64,
    pub train_every: u64,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Exploration floor after the second decay phase.
    pub eps_final: f64,
    /// Fraction of the run spent annealing eps_start -> eps_end.
    pub eps_anneal_fraction: f64,
}

impl Default for DqnSection {
    fn default() -> Self {
        Self {
            hidden: vec![32],
            learning_rate: 0.001,
            discount: 0.9,
            batch_size: 32,
            replay_capacity: 10_000,
            sync_period: 100,
            train_every: 4,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_final: 0.01,
            eps_anneal_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Time horizon T, slots.
    pub slots: u64,
    /// Summary statistics skip this leading fraction of the run.
    pub warmup_fraction: f64,
    pub seed: u64,
    pub policy: PolicyKind,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { slots: 5000, warmup_fraction: 0.2, seed: 0, policy: PolicyKind::Frlq }
    }
}

/// The whole experiment description; every field is echoed verbatim into
/// the run summary.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub catalog: CatalogConfig,
    pub popularity: PopularityConfig,
    pub radio: RadioConfig,
    pub world: WorldConfig,
    pub reward: RewardConfig,
    pub dqn: DqnSection,
    pub federation: FedConfig,
    pub run: RunConfig,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.catalog.num_contents == 0 || self.catalog.content_size_mb <= 0.0 {
            return Err(Error::Config("catalog must have contents of positive size".into()));
        }
        if self.world.num_faps == 0 || self.world.users_per_fap == 0 {
            return Err(Error::Config("world needs F-APs and users".into()));
        }
        if self.world.cache_capacity_mb <= 0.0 || self.world.coverage_radius_m <= 0.0 {
            return Err(Error::Config("capacity and radius must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.run.warmup_fraction) {
            return Err(Error::Config("warmup fraction must lie in [0,1]".into()));
        }
        if !(0.0..=1.0).contains(&self.popularity.shuffle_fraction) {
            return Err(Error::Config("shuffle fraction must lie in [0,1]".into()));
        }
        for e in [
            self.dqn.eps_start,
            self.dqn.eps_end,
            self.dqn.eps_final,
            self.dqn.eps_anneal_fraction,
        ] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Config("exploration parameters must lie in [0,1]".into()));
            }
        }
        self.dqn_config().validate()?;
        self.federation.validate()?;
        self.delay_model().validate()?;
        Ok(())
    }

    pub fn num_rbs(&self) -> usize {
        if self.world.num_rbs == 0 {
            self.world.users_per_fap
        } else {
            self.world.num_rbs
        }
    }

    /// Interference seen by a user: `kappa * (N - 1) * P * gain(radius)`,
    /// growing with network density.
    pub fn interference(&self) -> f64 {
        let gain = self.world.coverage_radius_m.max(1.0).powf(-self.radio.pathloss_exponent);
        self.radio.interference_coupling
            * (self.world.num_faps.saturating_sub(1)) as f64
            * self.radio.transmit_power
            * gain
    }

    pub fn delay_model(&self) -> DelayModel {
        DelayModel {
            rb_bandwidth: self.radio.rb_bandwidth,
            transmit_power: self.radio.transmit_power,
            noise_density: self.radio.noise_density,
            interference: self.interference(),
            fap_to_fap_delay: self.radio.fap_to_fap_delay,
            cloud_to_fap_delay: self.radio.cloud_to_fap_delay,
            pathloss_exponent: self.radio.pathloss_exponent,
        }
    }

    pub fn dqn_config(&self) -> crate::agents::DqnConfig {
        crate::agents::DqnConfig {
            hidden: self.dqn.hidden.clone(),
            learning_rate: self.dqn.learning_rate,
            discount: self.dqn.discount,
            batch_size: self.dqn.batch_size,
            replay_capacity: self.dqn.replay_capacity,
            sync_period: self.dqn.sync_period,
            train_every: self.dqn.train_every,
        }
    }

    /// Exploration rate at a slot: linear `eps_start -> eps_end` over the
    /// annealing window, then linear `eps_end -> eps_final` to the horizon.
    pub fn epsilon(&self, slot: u64) -> f64 {
        let t = slot as f64;
        let total = self.run.slots as f64;
        let anneal = (self.dqn.eps_anneal_fraction * total).max(1.0);
        if t < anneal {
            self.dqn.eps_start + (self.dqn.eps_end - self.dqn.eps_start) * t / anneal
        } else if total > anneal {
            let frac = ((t - anneal) / (total - anneal)).min(1.0);
            self.dqn.eps_end + (self.dqn.eps_final - self.dqn.eps_end) * frac
        } else {
            self.dqn.eps_end
        }
    }

    /// Assemble the simulated network for `seed`.
    pub fn build_world(&self, seed: u64) -> Result<World> {
        let catalog =
            Catalog::uniform(self.catalog.num_contents, self.catalog.content_size_mb)?;
        let popularity = build_popularity(
            &catalog,
            self.world.num_faps,
            self.popularity.skewness,
            self.popularity.plateau,
            self.popularity.shuffle_fraction,
            seed,
        )?;
        World::new(
            catalog,
            popularity,
            self.delay_model(),
            self.world.num_faps,
            self.world.users_per_fap,
            self.world.cache_capacity_mb,
            self.num_rbs(),
            self.world.coverage_radius_m,
            seed,
        )
    }
}
