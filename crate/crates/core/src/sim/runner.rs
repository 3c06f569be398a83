use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agents::{encode_state, lfu_evict, lru_evict, DqnAgent, PolicyStats, ACTION_NOOP};
use crate::env::{apply_cache_update, reward, serve_request, ServiceOutcome, SlotDelays, World};
use crate::error::{Error, Result};
use crate::federation::{aggregate_updates, FedConfig, RoundRecord};
use crate::neural::{Experience, LayeredParams};
use crate::seeding::{self, Stream};
use crate::sim::config::{PolicyKind, SimConfig};
use crate::sim::metrics::{
    avg_request_delay, hit_rate, write_metrics_csv, write_rounds_csv, RoundRow, SlotRow,
};

/// Post-warm-up aggregate statistics of one run, echoed with the full
/// configuration into `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub policy: String,
    pub seed: u64,
    pub slots_run: u64,
    pub warmup_slots: u64,
    pub total_requests: u64,
    pub hits: u64,
    pub hit_rate: f64,
    pub local_serves: u64,
    pub neighbor_serves: u64,
    pub cloud_serves: u64,
    pub avg_delay: f64,
    pub mean_reward: f64,
    pub periods_completed: u64,
    pub uploaded_bits: u64,
    pub config: SimConfig,
}

/// Everything one experiment produced.
#[derive(Debug)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub slot_rows: Vec<SlotRow>,
    pub round_rows: Vec<RoundRow>,
}

impl RunOutput {
    /// Write `metrics.csv`, `rounds.csv` and `summary.json` into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_metrics_csv(&dir.join("metrics.csv"), &self.slot_rows)?;
        write_rounds_csv(&dir.join("rounds.csv"), &self.round_rows)?;
        let json = serde_json::to_string_pretty(&self.summary)
            .map_err(|e| Error::Codec(e.to_string()))?;
        std::fs::write(dir.join("summary.json"), json + "\n")?;
        Ok(())
    }
}

/// A cache decision awaiting its successor state: (state, action, reward).
type Pending = Option<(Vec<f64>, usize, f64)>;

enum PolicyState {
    Heuristic { lfu: bool, stats: Vec<PolicyStats> },
    Learner(LearnerBank),
}

struct LearnerBank {
    /// One agent per F-AP, or a single shared agent for the centralized
    /// variant.
    agents: Vec<DqnAgent>,
    shared: bool,
    /// Global model of the federated variants.
    global: Option<LayeredParams>,
    pending: Vec<Pending>,
    /// This slot's (state, action) decisions per F-AP, in request order.
    decisions: Vec<Vec<(Vec<f64>, usize)>>,
    explore_rngs: Vec<ChaCha8Rng>,
    /// Losses drained since the last aggregation period, per agent.
    period_losses: Vec<Vec<f64>>,
}

impl LearnerBank {
    fn agent_index(&self, fap: usize) -> usize {
        if self.shared {
            0
        } else {
            fap
        }
    }
}

fn build_policy(cfg: &SimConfig, world: &World, seed: u64) -> Result<PolicyState> {
    let policy = cfg.run.policy;
    let num_faps = world.num_faps();
    let f = cfg.catalog.num_contents;
    match policy {
        PolicyKind::Lru | PolicyKind::Lfu => Ok(PolicyState::Heuristic {
            lfu: policy == PolicyKind::Lfu,
            stats: vec![PolicyStats::new(f); num_faps],
        }),
        _ => {
            let input_dim = 2 * f + 1;
            let slots_capacity =
                (cfg.world.cache_capacity_mb / cfg.catalog.content_size_mb).floor() as usize;
            if slots_capacity == 0 {
                return Err(Error::Config("cache cannot hold a single content".into()));
            }
            let num_actions = slots_capacity + 1;
            let dqn_cfg = cfg.dqn_config();
            let num_agents = if policy == PolicyKind::Centralized { 1 } else { num_faps };
            let mut agents = Vec::with_capacity(num_agents);
            for a in 0..num_agents {
                // Federated and centralized variants share one initialization;
                // independent learners start from distinct draws.
                let init_index = if policy == PolicyKind::Dqn { a as u64 } else { 0 };
                agents.push(DqnAgent::new(
                    input_dim,
                    num_actions,
                    dqn_cfg.clone(),
                    seeding::derive(seed, Stream::PolicyInit, init_index),
                    seeding::derive(seed, Stream::Replay, a as u64),
                )?);
            }
            let global = if policy.is_federated() { Some(agents[0].params().clone()) } else { None };
            if policy.is_federated() {
                // Every client starts on the shared global model.
                let g = global.clone().unwrap();
                for agent in &mut agents {
                    agent.set_params(&g)?;
                }
            }
            Ok(PolicyState::Learner(LearnerBank {
                agents,
                shared: policy == PolicyKind::Centralized,
                global,
                pending: vec![None; num_faps],
                decisions: vec![Vec::new(); num_faps],
                explore_rngs: (0..num_faps)
                    .map(|n| seeding::rng(seed, Stream::Exploration, n as u64))
                    .collect(),
                period_losses: vec![Vec::new(); num_agents],
            }))
        }
    }
}

/// Federation knobs for the active policy: FRLQ uses the configured
/// compression; FRL uploads raw deltas.
fn fed_cfg(cfg: &SimConfig) -> FedConfig {
    cfg.federation.clone()
}

/// Aggregate raw (uncompressed) client deltas, the FRL ablation. Returns
/// the new global model and per-client raw bit costs.
fn aggregate_raw(
    global: &LayeredParams,
    uploads: &[(u64, &LayeredParams)],
    equal_weight: bool,
) -> Result<(LayeredParams, Vec<u64>)> {
    let total: u64 = uploads.iter().map(|&(w, _)| if equal_weight { 1 } else { w.max(1) }).sum();
    let mut agg = global.zeros_like();
    let mut bits = Vec::with_capacity(uploads.len());
    for &(w, after) in uploads {
        let weight = if equal_weight { 1 } else { w.max(1) };
        let mut delta = after.sub(global)?;
        delta.scale(weight as f64 / total as f64);
        agg.add_assign(&delta)?;
        bits.push(after.param_count() as u64 * 32);
    }
    let mut next = global.clone();
    next.add_assign(&agg)?;
    Ok((next, bits))
}

/// Run one experiment: the slot loop of the caching simulation under the
/// configured policy and seed.
pub fn run_experiment(cfg: &SimConfig, seed: u64) -> Result<RunOutput> {
    cfg.validate()?;
    let mut world = cfg.build_world(seed)?;
    let num_faps = world.num_faps();
    let users = cfg.world.users_per_fap;
    let f = cfg.catalog.num_contents;
    let sizes: Vec<f64> = (0..f).map(|c| world.catalog.size_mb(c)).collect();
    let zeta = cfg.reward.zeta;
    let policy = cfg.run.policy;
    let fed = fed_cfg(cfg);
    let mut state = build_policy(cfg, &world, seed)?;

    let warmup_slots = (cfg.run.warmup_fraction * cfg.run.slots as f64).floor() as u64;
    let mut slot_rows = Vec::with_capacity((cfg.run.slots as usize) * num_faps);
    let mut round_rows: Vec<RoundRow> = Vec::new();

    // Post-warm-up accumulators.
    let mut total_requests = 0u64;
    let mut total_hits = 0u64;
    let mut serves = [0u64; 3];
    let mut delay_sum = 0.0;
    let mut reward_sum = 0.0;
    let mut reward_count = 0u64;
    // Whole-run cumulative reward shown in metrics.csv.
    let mut cum_reward = 0.0;
    // Current aggregation-period window.
    let mut period_requests = 0u64;
    let mut period_hits = 0u64;
    let mut periods_done = 0u64;
    let mut uploaded_bits = 0u64;
    let mut slots_run = 0u64;

    for slot in 0..cfg.run.slots {
        let snapshot: Vec<Vec<bool>> =
            world.faps.iter().map(|fp| fp.cache_bits().to_vec()).collect();
        let eps = cfg.epsilon(slot);

        let mut fap_hits = vec![0u64; num_faps];
        let mut fap_outcomes: Vec<Vec<ServiceOutcome>> = vec![Vec::with_capacity(users); num_faps];
        let mut base_sum = 0.0;
        let mut neighbor_sum = 0.0;
        let mut neighbor_count = 0u64;
        let mut cloud_sum = 0.0;
        let mut cloud_count = 0u64;
        let mut slot_delay_sum = 0.0;

        for fap in 0..num_faps {
            for user in 0..users {
                let ev = world.draw_request(slot, fap, user);
                let (outcome, delay) = serve_request(&world, &snapshot, &ev);
                let base = world.local_delay(fap, user, ev.content);
                base_sum += base;
                slot_delay_sum += delay;
                match outcome {
                    ServiceOutcome::Local => {
                        fap_hits[fap] += 1;
                    }
                    ServiceOutcome::NeighborFap(_) => {
                        neighbor_sum += delay;
                        neighbor_count += 1;
                    }
                    ServiceOutcome::Cloud => {
                        cloud_sum += delay;
                        cloud_count += 1;
                    }
                }
                fap_outcomes[fap].push(outcome);

                if let PolicyState::Heuristic { ref mut stats, .. } = state {
                    stats[fap].note_request(ev.content, slot);
                }

                // Cache replacement runs only for cloud-served requests.
                if outcome != ServiceOutcome::Cloud {
                    continue;
                }
                if world.faps[fap].has_room(sizes[ev.content]) {
                    apply_cache_update(&mut world.faps[fap], &sizes, ev.content, None)?;
                    continue;
                }
                match state {
                    PolicyState::Heuristic { lfu, ref stats } => {
                        let cached = world.faps[fap].cached_ids();
                        let victim = if lfu {
                            lfu_evict(&stats[fap], &cached)?
                        } else {
                            lru_evict(&stats[fap], &cached)?
                        };
                        apply_cache_update(&mut world.faps[fap], &sizes, ev.content, Some(victim))?;
                    }
                    PolicyState::Learner(ref mut bank) => {
                        let fp = &world.faps[fap];
                        let s = encode_state(
                            fp.cache_bits(),
                            ev.content,
                            fp.rb_of_user(user),
                            fp.num_rbs(),
                        );
                        let cached = fp.cached_ids();
                        let num_valid = cached.len() + 1;
                        let ai = bank.agent_index(fap);
                        let action =
                            bank.agents[ai].act(&s, num_valid, eps, &mut bank.explore_rngs[fap])?;
                        if action != ACTION_NOOP {
                            let victim = cached[action - 1];
                            apply_cache_update(
                                &mut world.faps[fap],
                                &sizes,
                                ev.content,
                                Some(victim),
                            )?;
                        }
                        bank.decisions[fap].push((s, action));
                    }
                }
            }
        }

        // Slot-level per-path average delays (the D-terms of the reward).
        let requests_this_slot = (num_faps * users) as u64;
        let delays = SlotDelays {
            local: base_sum / requests_this_slot as f64,
            neighbor: if neighbor_count > 0 { neighbor_sum / neighbor_count as f64 } else { 0.0 },
            cloud: if cloud_count > 0 { cloud_sum / cloud_count as f64 } else { 0.0 },
        };

        // Per-F-AP slot reward: mean immediate reward over its requests.
        let mut slot_reward_network = 0.0;
        let mut fap_rewards = vec![0.0; num_faps];
        for fap in 0..num_faps {
            let mut sum = 0.0;
            for &o in &fap_outcomes[fap] {
                sum += reward(o, delays, zeta)?;
            }
            fap_rewards[fap] = sum / fap_outcomes[fap].len() as f64;
            slot_reward_network += sum;
        }
        cum_reward += slot_reward_network / requests_this_slot as f64;

        // Close the experience chains: each decision's successor state is
        // the next decision of the same F-AP; the final one stays pending.
        if let PolicyState::Learner(ref mut bank) = state {
            for fap in 0..num_faps {
                let ai = bank.agent_index(fap);
                let decisions = std::mem::take(&mut bank.decisions[fap]);
                let mut chain: Vec<(Vec<f64>, usize, f64)> = Vec::new();
                if let Some(p) = bank.pending[fap].take() {
                    chain.push(p);
                }
                for (s, a) in decisions {
                    chain.push((s, a, fap_rewards[fap]));
                }
                if let Some(last) = chain.pop() {
                    for i in 0..chain.len() {
                        let next_state =
                            if i + 1 < chain.len() { chain[i + 1].0.clone() } else { last.0.clone() };
                        let (s, a, r) = chain[i].clone();
                        bank.agents[ai]
                            .observe(Experience { state: s, action: a, reward: r, next_state })?;
                    }
                    bank.pending[fap] = Some(last);
                }
            }
        }

        // Drain this slot's training losses for the metrics rows and the
        // period accounting.
        let mut fap_losses: Vec<Option<f64>> = vec![None; num_faps];
        if let PolicyState::Learner(ref mut bank) = state {
            for ai in 0..bank.agents.len() {
                if let Some(l) = bank.agents[ai].drain_mean_loss() {
                    fap_losses[ai] = Some(l);
                    bank.period_losses[ai].push(l);
                }
            }
        }

        let slot_avg_delay = avg_request_delay(slot_delay_sum, requests_this_slot).unwrap();
        for fap in 0..num_faps {
            let hits = fap_hits[fap];
            slot_rows.push(SlotRow {
                slot,
                fap,
                requests: users as u64,
                hits,
                hit_rate: hit_rate(hits, users as u64),
                avg_delay: slot_avg_delay,
                cum_reward,
                loss: fap_losses[fap],
            });
        }

        let slot_hits: u64 = fap_hits.iter().sum();
        period_requests += requests_this_slot;
        period_hits += slot_hits;
        if slot >= warmup_slots {
            total_requests += requests_this_slot;
            total_hits += slot_hits;
            serves[0] += requests_this_slot - neighbor_count - cloud_count;
            serves[1] += neighbor_count;
            serves[2] += cloud_count;
            delay_sum += slot_delay_sum;
            reward_sum += slot_reward_network;
            reward_count += requests_this_slot;
        }
        slots_run = slot + 1;

        // Synchronous federation: aggregate once every client has run its
        // X local updates since the last broadcast.
        if policy.is_federated() && periods_done < fed.periods {
            let ready = match state {
                PolicyState::Learner(ref bank) => bank
                    .agents
                    .iter()
                    .all(|a| a.steps_since_broadcast() >= fed.local_updates),
                _ => false,
            };
            if ready {
                if let PolicyState::Learner(ref mut bank) = state {
                    let global = bank.global.as_ref().unwrap().clone();
                    let uploads: Vec<(u64, &LayeredParams)> = bank
                        .agents
                        .iter()
                        .map(|a| (a.replay_len() as u64, a.params()))
                        .collect();
                    let client_losses: Vec<Option<f64>> = bank
                        .period_losses
                        .iter()
                        .map(|ls| {
                            if ls.is_empty() {
                                None
                            } else {
                                Some(ls.iter().sum::<f64>() / ls.len() as f64)
                            }
                        })
                        .collect();
                    let mean_loss = {
                        let known: Vec<f64> = client_losses.iter().filter_map(|&l| l).collect();
                        if known.is_empty() {
                            f64::NAN
                        } else {
                            known.iter().sum::<f64>() / known.len() as f64
                        }
                    };
                    let (next, record): (LayeredParams, RoundRecord) = match policy {
                        PolicyKind::Frlq => {
                            aggregate_updates(&global, &uploads, &fed, periods_done, mean_loss)?
                        }
                        PolicyKind::Frl => {
                            let (next, bits) =
                                aggregate_raw(&global, &uploads, fed.equal_weight)?;
                            let record = RoundRecord {
                                period: periods_done,
                                checksum: next.checksum(),
                                mean_loss,
                                bit_ratio: 1.0,
                                param_ratio: 1.0,
                                client_bit_costs: bits,
                            };
                            (next, record)
                        }
                        _ => unreachable!(),
                    };
                    let window_hit_rate = hit_rate(period_hits, period_requests);
                    for (client, &bits) in record.client_bit_costs.iter().enumerate() {
                        uploaded_bits += bits;
                        round_rows.push(RoundRow {
                            period: periods_done,
                            client,
                            bit_cost: bits,
                            bit_ratio: record.bit_ratio,
                            param_ratio: record.param_ratio,
                            loss: client_losses[client],
                            hit_rate: window_hit_rate,
                        });
                    }
                    for agent in &mut bank.agents {
                        agent.set_params(&next)?;
                    }
                    for ls in &mut bank.period_losses {
                        ls.clear();
                    }
                    bank.global = Some(next);
                }
                periods_done += 1;
                period_requests = 0;
                period_hits = 0;
                // The federated run ends at min(T slots, Y periods).
                if periods_done >= fed.periods {
                    break;
                }
            }
        }
    }

    let summary = RunSummary {
        policy: policy.label().to_string(),
        seed,
        slots_run,
        warmup_slots,
        total_requests,
        hits: total_hits,
        hit_rate: hit_rate(total_hits, total_requests).unwrap_or(f64::NAN),
        local_serves: serves[0],
        neighbor_serves: serves[1],
        cloud_serves: serves[2],
        avg_delay: avg_request_delay(delay_sum, total_requests).unwrap_or(f64::NAN),
        mean_reward: if reward_count > 0 { reward_sum / reward_count as f64 } else { f64::NAN },
        periods_completed: periods_done,
        uploaded_bits,
        config: cfg.clone(),
    };
    Ok(RunOutput { summary, slot_rows, round_rows })
}

/// Run the same configuration and seed under several policies; the shared
/// request streams make the comparison paired.
pub fn compare_policies(
    cfg: &SimConfig,
    policies: &[PolicyKind],
    seed: u64,
) -> Result<Vec<RunOutput>> {
    policies
        .iter()
        .map(|&p| {
            let mut c = cfg.clone();
            c.run.policy = p;
            run_experiment(&c, seed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tiny_cfg(policy: PolicyKind) -> SimConfig {
        let mut cfg = SimConfig::default();
        cfg.catalog.num_contents = 20;
        cfg.world.num_faps = 3;
        cfg.world.users_per_fap = 2;
        cfg.world.cache_capacity_mb = 4.0;
        cfg.run.slots = 80;
        cfg.run.policy = policy;
        cfg.dqn.hidden = vec![8];
        cfg.dqn.batch_size = 8;
        cfg.dqn.train_every = 1;
        cfg.dqn.replay_capacity = 256;
        cfg.federation.periods = 5;
        cfg.federation.local_updates = 5;
        cfg.federation.clusters = 4;
        cfg.federation.keep_fraction = 0.6;
        cfg
    }

    #[test]
    fn runs_are_bit_reproducible() {
        for policy in [PolicyKind::Lru, PolicyKind::Dqn, PolicyKind::Frlq] {
            let cfg = tiny_cfg(policy);
            let a = run_experiment(&cfg, 7).unwrap();
            let b = run_experiment(&cfg, 7).unwrap();
            assert_eq!(
                serde_json::to_string(&a.summary).unwrap(),
                serde_json::to_string(&b.summary).unwrap()
            );
            assert_eq!(a.slot_rows.len(), b.slot_rows.len());
            for (x, y) in a.slot_rows.iter().zip(b.slot_rows.iter()) {
                assert_eq!(serde_json::to_string(x).unwrap(), serde_json::to_string(y).unwrap());
            }
            for (x, y) in a.round_rows.iter().zip(b.round_rows.iter()) {
                assert_eq!(serde_json::to_string(x).unwrap(), serde_json::to_string(y).unwrap());
            }
        }
    }

    #[test]
    fn serving_counts_are_conserved() {
        for policy in [PolicyKind::Lfu, PolicyKind::Centralized, PolicyKind::Frl] {
            let cfg = tiny_cfg(policy);
            let out = run_experiment(&cfg, 3).unwrap();
            let s = &out.summary;
            assert_eq!(s.local_serves + s.neighbor_serves + s.cloud_serves, s.total_requests);
            assert_eq!(s.hits, s.local_serves);
            assert!(s.hit_rate >= 0.0 && s.hit_rate <= 1.0);
        }
    }

    #[test]
    fn request_traces_are_policy_invariant() {
        // Identical seeds produce identical request streams regardless of
        // the policy, so total request counts and the base-delay geometry
        // agree across runs.
        let a = run_experiment(&tiny_cfg(PolicyKind::Lru), 11).unwrap();
        let b = run_experiment(&tiny_cfg(PolicyKind::Lfu), 11).unwrap();
        assert_eq!(a.summary.total_requests, b.summary.total_requests);
    }

    #[test]
    fn federated_run_stops_after_configured_periods() {
        let mut cfg = tiny_cfg(PolicyKind::Frlq);
        cfg.federation.periods = 2;
        cfg.run.slots = 500;
        let out = run_experiment(&cfg, 1).unwrap();
        assert_eq!(out.summary.periods_completed, 2);
        assert!(out.summary.slots_run < 500);
        let clients = cfg.world.num_faps;
        assert_eq!(out.round_rows.len(), 2 * clients);
        assert!(out.summary.uploaded_bits > 0);
    }

    #[test]
    fn non_federated_policies_produce_no_rounds() {
        for policy in [PolicyKind::Lru, PolicyKind::Dqn, PolicyKind::Centralized] {
            let out = run_experiment(&tiny_cfg(policy), 5).unwrap();
            assert!(out.round_rows.is_empty());
            assert_eq!(out.summary.uploaded_bits, 0);
        }
    }

    #[test]
    fn raw_uploads_cost_full_width() {
        let cfg = tiny_cfg(PolicyKind::Frl);
        let out = run_experiment(&cfg, 2).unwrap();
        assert!(!out.round_rows.is_empty());
        for r in &out.round_rows {
            assert_abs_diff_eq!(r.bit_ratio, 1.0);
            assert_abs_diff_eq!(r.param_ratio, 1.0);
            assert_eq!(r.bit_cost % 32, 0);
        }
    }

    #[test]
    fn compressed_uploads_cost_less_than_raw() {
        let frlq = run_experiment(&tiny_cfg(PolicyKind::Frlq), 4).unwrap();
        let frl = run_experiment(&tiny_cfg(PolicyKind::Frl), 4).unwrap();
        assert!(frlq.summary.uploaded_bits < frl.summary.uploaded_bits);
        for r in &frlq.round_rows {
            assert!(r.bit_ratio < 1.0);
            assert!(r.param_ratio < 1.0);
        }
    }

    #[test]
    fn capacity_invariant_holds_throughout() {
        let cfg = tiny_cfg(PolicyKind::Frlq);
        let mut world = cfg.build_world(9).unwrap();
        // Re-run manually for a few slots and check occupancy directly.
        let out = run_experiment(&cfg, 9).unwrap();
        assert!(out.summary.slots_run > 0);
        // The run would have returned an invariant error otherwise; also
        // check a fresh world's static capacity arithmetic.
        for f in &mut world.faps {
            assert!(f.used_mb() <= f.capacity_mb() + 1e-9);
        }
    }

    #[test]
    fn artifacts_are_written_and_parse_back(){
        let dir = std::env::temp_dir().join(format!("fogcache-test-{}", std::process::id()));
        let out = run_experiment(&tiny_cfg(PolicyKind::Frlq), 6).unwrap();
        out.write_artifacts(&dir).unwrap();
        let metrics = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
        let mut lines = metrics.lines();
        assert_eq!(lines.next().unwrap(), crate::sim::metrics::METRICS_HEADER);
        assert_eq!(
            metrics.lines().count() as u64 - 1,
            out.summary.slots_run * 3
        );
        let rounds = std::fs::read_to_string(dir.join("rounds.csv")).unwrap();
        assert_eq!(rounds.lines().next().unwrap(), crate::sim::metrics::ROUNDS_HEADER);
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["policy"], "frlq");
        assert_eq!(summary["config"]["world"]["num_faps"], 3);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn larger_cache_never_hurts_heuristics() {
        let mut rates = Vec::new();
        for cap in [2.0, 4.0, 8.0] {
            let mut cfg = tiny_cfg(PolicyKind::Lfu);
            cfg.world.cache_capacity_mb = cap;
            cfg.run.slots = 120;
            rates.push(run_experiment(&cfg, 1).unwrap().summary.hit_rate);
        }
        assert!(rates[0] <= rates[1] + 1e-12 && rates[1] <= rates[2] + 1e-12, "{rates:?}");
    }
}
