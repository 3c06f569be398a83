use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Fraction of requests served from the F-AP's own cache;
/// `None` when no requests were made.
pub fn hit_rate(hits: u64, requests: u64) -> Option<f64> {
    if requests == 0 {
        None
    } else {
        Some(hits as f64 / requests as f64)
    }
}

/// Mean end-to-end delay per request; `None` when no requests were made.
pub fn avg_request_delay(total_delay_s: f64, requests: u64) -> Option<f64> {
    if requests == 0 {
        None
    } else {
        Some(total_delay_s / requests as f64)
    }
}

/// Nine-significant-digit float rendering used in every CSV artifact.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.8e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_sig(v),
        None => "nan".to_string(),
    }
}

/// One `metrics.csv` row: per-F-AP serving counts for a slot plus the
/// network-level slot delay, cumulative reward, and that F-AP's training
/// loss drained this slot (nan when no gradient step ran).
#[derive(Debug, Clone, Serialize)]
pub struct SlotRow {
    pub slot: u64,
    pub fap: usize,
    pub requests: u64,
    pub hits: u64,
    pub hit_rate: Option<f64>,
    pub avg_delay: f64,
    pub cum_reward: f64,
    pub loss: Option<f64>,
}

pub const METRICS_HEADER: &str = "slot,fap,requests,hits,hit_rate,avg_delay,cum_reward,loss";

impl SlotRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.slot,
            self.fap,
            self.requests,
            self.hits,
            fmt_opt(self.hit_rate),
            fmt_sig(self.avg_delay),
            fmt_sig(self.cum_reward),
            fmt_opt(self.loss),
        )
    }
}

/// One `rounds.csv` row: a federation client's upload accounting for one
/// aggregation period, plus the network hit rate over the period window.
#[derive(Debug, Clone, Serialize)]
pub struct RoundRow {
    pub period: u64,
    pub client: usize,
    pub bit_cost: u64,
    pub bit_ratio: f64,
    pub param_ratio: f64,
    pub loss: Option<f64>,
    pub hit_rate: Option<f64>,
}

pub const ROUNDS_HEADER: &str = "period,client,bit_cost,bit_ratio,param_ratio,loss,hit_rate";

impl RoundRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.period,
            self.client,
            self.bit_cost,
            fmt_sig(self.bit_ratio),
            fmt_sig(self.param_ratio),
            fmt_opt(self.loss),
            fmt_opt(self.hit_rate),
        )
    }
}

pub fn write_metrics_csv(path: &Path, rows: &[SlotRow]) -> Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_rounds_csv(path: &Path, rows: &[RoundRow]) -> Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(ROUNDS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}
