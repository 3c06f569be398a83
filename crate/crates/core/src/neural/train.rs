use ndarray::Array2;

use crate::error::{Error, Result};
use crate::neural::{DuelingNet, Experience, LayeredParams};

/// Mean-squared Bellman loss over a mini-batch and its gradient w.r.t. the
/// prediction network only; the target network is treated as a constant.
///
/// `loss = mean_i (r_i + gamma * max_a' Q_target(s'_i, a') - Q_pred(s_i, a_i))^2`
pub fn td_loss(
    pred: &DuelingNet,
    target: &DuelingNet,
    batch: &[&Experience],
    gamma: f64,
) -> Result<(f64, LayeredParams)> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("empty mini-batch".into()));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter("discount must lie in [0,1)".into()));
    }
    let b = batch.len();
    let dim = pred.input_dim();
    let mut states = Array2::zeros((b, dim));
    let mut next_states = Array2::zeros((b, dim));
    for (i, exp) in batch.iter().enumerate() {
        if exp.state.len() != dim || exp.next_state.len() != dim {
            return Err(Error::ShapeMismatch("experience state length mismatch".into()));
        }
        states.row_mut(i).assign(&ndarray::ArrayView1::from(&exp.state[..]));
        next_states.row_mut(i).assign(&ndarray::ArrayView1::from(&exp.next_state[..]));
    }
    let (q_next, _) = target.forward_batch(next_states.view());
    let (q_pred, cache) = pred.forward_batch(states.view());

    let mut loss = 0.0;
    let mut dq = Array2::zeros(q_pred.raw_dim());
    for (i, exp) in batch.iter().enumerate() {
        let max_next = q_next.row(i).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let y = exp.reward + gamma * max_next;
        let e = y - q_pred[[i, exp.action]];
        loss += e * e;
        dq[[i, exp.action]] = -2.0 * e / b as f64;
    }
    loss /= b as f64;
    let grad = pred.backward(&cache, &dq);
    Ok((loss, grad))
}

/// One plain SGD step: `params <- params - rate * grad`.
pub fn sgd_step(params: &mut LayeredParams, grad: &LayeredParams, rate: f64) -> Result<()> {
    if rate <= 0.0 {
        return Err(Error::InvalidParameter("learning rate must be positive".into()));
    }
    params.step_assign(grad, rate)
}

/// Copy the prediction parameters into the target every `period` steps.
/// Returns true when a copy happened.
pub fn sync_target(pred: &DuelingNet, target: &mut DuelingNet, step: u64, period: u64) -> bool {
    debug_assert!(period >= 1);
    if step % period == 0 {
        target.params = pred.params.clone();
        true
    } else {
        false
    }
}
