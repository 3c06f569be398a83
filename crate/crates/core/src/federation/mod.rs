//! Federated orchestration: periodic local training, upload of pruned and
//! quantized model deltas, dataset-size-weighted aggregation, and
//! broadcast of the refreshed global model.

use serde::{Deserialize, Serialize};

use crate::compress::{compress, decode, LayerEntry, QuantizedUpdate};
use crate::error::{Error, Result};
use crate::neural::LayeredParams;

/// Federation-level knobs. The learning-rate schedule of the convex
/// testbed lives in the convergence module; reinforcement clients train at
/// their own constant rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FedConfig {
    /// Number of aggregation periods Y.
    pub periods: u64,
    /// Local gradient steps per period X.
    pub local_updates: u64,
    pub keep_fraction: f64,
    pub clusters: usize,
    /// Ablation switch: ignore dataset sizes and average plainly.
    pub equal_weight: bool,
}

impl Default for FedConfig {
    fn default() -> Self {
        Self {
            periods: 50,
            local_updates: 20,
            keep_fraction: 0.9,
            clusters: 32,
            equal_weight: false,
        }
    }
}

impl FedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.local_updates < 1 {
            return Err(Error::InvalidParameter("local updates per period must be >= 1".into()));
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return Err(Error::InvalidParameter("keep fraction must lie in (0,1]".into()));
        }
        if self.clusters < 1 {
            return Err(Error::InvalidParameter("cluster count must be >= 1".into()));
        }
        Ok(())
    }
}

/// A federation participant. Clients expose only parameter-level state;
/// raw experiences never cross this boundary.
pub trait FedClient {
    /// Install the broadcast global model.
    fn set_params(&mut self, params: &LayeredParams) -> Result<()>;
    /// Run `x` local updates; returns the mean training loss over them.
    fn local_round(&mut self, x: u64) -> Result<f64>;
    fn params(&self) -> &LayeredParams;
    /// Local dataset size used as the aggregation weight.
    fn dataset_size(&self) -> u64;
}

/// Outcome of one aggregation period.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub period: u64,
    /// Upload accounting per client, in bits.
    pub client_bit_costs: Vec<u64>,
    /// Checksum of the post-aggregation global model.
    pub checksum: u64,
    /// Mean of the clients' local training losses this period.
    pub mean_loss: f64,
    /// This period's uploaded bits over the uncompressed-upload bits.
    pub bit_ratio: f64,
    /// This period's uploaded parameter count over the full model size.
    pub param_ratio: f64,
}

fn kept_params(update: &QuantizedUpdate) -> u64 {
    update
        .entries
        .iter()
        .map(|e| match e {
            LayerEntry::Kept(cb) => cb.indices.len() as u64,
            LayerEntry::Dropped => 0,
        })
        .sum()
}

/// Compress every client's post-training parameters against the global
/// model and apply the weighted aggregation
/// `theta' = theta + sum_n D_n * decode(Q(delta_n)) / sum_n D_n`.
/// `uploads` pairs each client's dataset size with its parameters.
pub fn aggregate_updates(
    global: &LayeredParams,
    uploads: &[(u64, &LayeredParams)],
    cfg: &FedConfig,
    period: u64,
    mean_loss: f64,
) -> Result<(LayeredParams, RoundRecord)> {
    cfg.validate()?;
    if uploads.is_empty() {
        return Err(Error::InvalidParameter("at least one client required".into()));
    }
    let mut decoded: Vec<(u64, LayeredParams)> = Vec::with_capacity(uploads.len());
    let mut bit_costs = Vec::with_capacity(uploads.len());
    let mut uploaded_params = 0u64;
    let mut raw_bits_total = 0u64;
    for &(dataset, after) in uploads {
        let update = compress(global, after, cfg.keep_fraction, cfg.clusters, dataset)?;
        bit_costs.push(update.bit_cost());
        uploaded_params += kept_params(&update);
        raw_bits_total += update.raw_bits();
        let weight = if cfg.equal_weight { 1 } else { update.dataset_size.max(1) };
        decoded.push((weight, decode(&update, global)?));
    }
    let total_weight: u64 = decoded.iter().map(|(w, _)| *w).sum();
    let mut aggregate = global.zeros_like();
    for (w, mut delta) in decoded {
        delta.scale(w as f64 / total_weight as f64);
        aggregate.add_assign(&delta)?;
    }
    let mut next = global.clone();
    next.add_assign(&aggregate)?;
    let record = RoundRecord {
        period,
        checksum: next.checksum(),
        mean_loss,
        bit_ratio: bit_costs.iter().sum::<u64>() as f64 / raw_bits_total as f64,
        param_ratio: uploaded_params as f64
            / (uploads.len() as u64 * global.param_count() as u64) as f64,
        client_bit_costs: bit_costs,
    };
    Ok((next, record))
}

/// One synchronous period: broadcast, X local updates per client, then the
/// compressed upload and weighted aggregation.
pub fn run_period(
    global: &LayeredParams,
    clients: &mut [&mut dyn FedClient],
    cfg: &FedConfig,
    period: u64,
) -> Result<(LayeredParams, RoundRecord)> {
    cfg.validate()?;
    if clients.is_empty() {
        return Err(Error::InvalidParameter("at least one client required".into()));
    }
    let mut loss_sum = 0.0;
    for client in clients.iter_mut() {
        client.set_params(global)?;
        loss_sum += client.local_round(cfg.local_updates)?;
    }
    let uploads: Vec<(u64, &LayeredParams)> =
        clients.iter().map(|c| (c.dataset_size(), c.params())).collect();
    aggregate_updates(global, &uploads, cfg, period, loss_sum / uploads.len() as f64)
}

/// Run `cfg.periods` periods from `initial`; returns the final global
/// model and the per-period trajectory.
pub fn run_training(
    initial: &LayeredParams,
    clients: &mut [&mut dyn FedClient],
    cfg: &FedConfig,
) -> Result<(LayeredParams, Vec<RoundRecord>)> {
    cfg.validate()?;
    let mut global = initial.clone();
    let mut records = Vec::with_capacity(cfg.periods as usize);
    for period in 0..cfg.periods {
        let (next, record) = run_period(&global, clients, cfg, period)?;
        global = next;
        records.push(record);
    }
    Ok((global, records))
}

/// Cumulative uploaded-bits ratio against the uncompressed baseline, where
/// the baseline uploads every parameter at full width each period.
pub fn uploaded_ratio(records: &[RoundRecord], raw_bits_per_period: u64) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no round records".into()));
    }
    let uploaded: u64 = records.iter().map(|r| r.client_bit_costs.iter().sum::<u64>()).sum();
    Ok(uploaded as f64 / (records.len() as u64 * raw_bits_per_period) as f64)
}
