use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{sgd_step, sync_target, td_loss, DuelingNet, Experience, LayeredParams, ReplayMemory};

/// Hyper-parameters of one dueling-DQN cache agent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnConfig {
    /// Trunk layer widths.
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub discount: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Target-network copy period, in gradient steps.
    pub sync_period: u64,
    /// Train once per this many stored experiences (1 = every observation).
    pub train_every: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            learning_rate: 0.001,
            discount: 0.9,
            batch_size: 32,
            replay_capacity: 10_000,
            sync_period: 100,
            train_every: 1,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::InvalidParameter("hidden widths must be positive".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::InvalidParameter("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::InvalidParameter("discount must lie in [0,1)".into()));
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return Err(Error::InvalidParameter(
                "replay capacity must hold at least one mini-batch".into(),
            ));
        }
        if self.sync_period == 0 || self.train_every == 0 {
            return Err(Error::InvalidParameter("periods must be positive".into()));
        }
        Ok(())
    }
}

/// One cache-replacement learner: prediction and target networks, a replay
/// memory, and the training cadence bookkeeping.
pub struct DqnAgent {
    pred: DuelingNet,
    target: DuelingNet,
    replay: ReplayMemory,
    cfg: DqnConfig,
    sgd_steps: u64,
    steps_since_broadcast: u64,
    observed: u64,
    recent_losses: Vec<f64>,
}

impl DqnAgent {
    pub fn new(
        input_dim: usize,
        num_actions: usize,
        cfg: DqnConfig,
        init_seed: u64,
        replay_seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let pred = DuelingNet::new(input_dim, &cfg.hidden, num_actions, init_seed)?;
        let target = pred.clone();
        let replay = ReplayMemory::new(cfg.replay_capacity, replay_seed);
        Ok(Self {
            pred,
            target,
            replay,
            cfg,
            sgd_steps: 0,
            steps_since_broadcast: 0,
            observed: 0,
            recent_losses: Vec::new(),
        })
    }

    pub fn num_actions(&self) -> usize {
        self.pred.num_actions()
    }

    pub fn replay_len(&self) -> usize {
        self.replay.len()
    }

    pub fn sgd_steps(&self) -> u64 {
        self.sgd_steps
    }

    /// Gradient steps since the last `set_params` (federation broadcast).
    pub fn steps_since_broadcast(&self) -> u64 {
        self.steps_since_broadcast
    }

    pub fn params(&self) -> &LayeredParams {
        &self.pred.params
    }

    /// Install broadcast parameters into both networks and restart the
    /// local-step counter.
    pub fn set_params(&mut self, params: &LayeredParams) -> Result<()> {
        if !self.pred.params.conformable(params) {
            return Err(Error::ShapeMismatch("broadcast parameters do not fit agent".into()));
        }
        self.pred.params = params.clone();
        self.target.params = params.clone();
        self.steps_since_broadcast = 0;
        Ok(())
    }

    /// Mean training loss over the losses recorded since the last call.
    pub fn drain_mean_loss(&mut self) -> Option<f64> {
        if self.recent_losses.is_empty() {
            return None;
        }
        let m = self.recent_losses.iter().sum::<f64>() / self.recent_losses.len() as f64;
        self.recent_losses.clear();
        Some(m)
    }

    /// Epsilon-greedy action over the valid prefix `0..num_valid` of the
    /// action space (0 = keep, i = evict slot i). Greedy ties break toward
    /// the lowest index.
    pub fn act<R: Rng>(&self, state: &[f64], num_valid: usize, eps: f64, rng: &mut R) -> Result<usize> {
        if num_valid == 0 || num_valid > self.pred.num_actions() {
            return Err(Error::InvalidParameter(format!(
                "valid action count {num_valid} outside 1..={}",
                self.pred.num_actions()
            )));
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidParameter("exploration rate must lie in [0,1]".into()));
        }
        if rng.gen::<f64>() < eps {
            return Ok(rng.gen_range(0..num_valid));
        }
        let q = self.pred.forward(state)?;
        let mut best = 0usize;
        for (i, &v) in q[..num_valid].iter().enumerate() {
            if v > q[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Store one transition and run a gradient step when the cadence and
    /// warm-up conditions are met. Returns the training loss if a step ran.
    pub fn observe(&mut self, exp: Experience) -> Result<Option<f64>> {
        self.replay.push(exp);
        self.observed += 1;
        if self.replay.len() < self.cfg.batch_size || self.observed % self.cfg.train_every != 0 {
            return Ok(None);
        }
        Ok(Some(self.train_step()?))
    }

    fn train_step(&mut self) -> Result<f64> {
        let batch = self.replay.sample(self.cfg.batch_size);
        let (loss, grad) = td_loss(&self.pred, &self.target, &batch, self.cfg.discount)?;
        sgd_step(&mut self.pred.params, &grad, self.cfg.learning_rate)?;
        self.sgd_steps += 1;
        self.steps_since_broadcast += 1;
        sync_target(&self.pred, &mut self.target, self.sgd_steps, self.cfg.sync_period);
        self.recent_losses.push(loss);
        Ok(loss)
    }
}
