use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::neural::{Layer, LayeredParams};

/// Dueling Q-network: a shared ReLU trunk feeding a scalar state-value head
/// and an advantage head, merged as `Q(s,a) = V(s) + A(s,a) - mean_a' A(s,a')`.
///
/// Parameter layout: trunk layers in order, then the value head, then the
/// advantage head.
#[derive(Debug, Clone)]
pub struct DuelingNet {
    pub params: LayeredParams,
    input_dim: usize,
    num_actions: usize,
    num_trunk: usize,
}

/// Intermediate activations of a batch forward pass, kept for backprop.
pub(crate) struct ForwardCache {
    /// Input plus post-ReLU trunk activations, one per trunk boundary.
    activations: Vec<Array2<f64>>,
    advantages: Array2<f64>,
}

impl DuelingNet {
    /// Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    pub fn new(input_dim: usize, hidden: &[usize], num_actions: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || num_actions == 0 || hidden.is_empty() {
            return Err(Error::InvalidParameter(
                "network needs input, at least one hidden layer, and actions".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        let mut prev = input_dim;
        for &h in hidden {
            layers.push(init_layer(prev, h, &mut rng));
            prev = h;
        }
        layers.push(init_layer(prev, 1, &mut rng));
        layers.push(init_layer(prev, num_actions, &mut rng));
        Ok(Self {
            params: LayeredParams { layers },
            input_dim,
            num_actions,
            num_trunk: hidden.len(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn value_layer(&self) -> &Layer {
        &self.params.layers[self.num_trunk]
    }

    fn advantage_layer(&self) -> &Layer {
        &self.params.layers[self.num_trunk + 1]
    }

    /// Q-values for a single state.
    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "state length {} does not match input dim {}",
                state.len(),
                self.input_dim
            )));
        }
        let input = ArrayView2::from_shape((1, self.input_dim), state)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        let (q, _) = self.forward_batch(input);
        Ok(q.row(0).to_vec())
    }

    /// Batch forward pass returning Q `(batch, actions)` and the cache.
    pub(crate) fn forward_batch(&self, states: ArrayView2<f64>) -> (Array2<f64>, ForwardCache) {
        let mut activations = Vec::with_capacity(self.num_trunk + 1);
        activations.push(states.to_owned());
        let mut a = states.to_owned();
        for layer in &self.params.layers[..self.num_trunk] {
            let mut z = a.dot(&layer.weights);
            z += &layer.biases;
            z.mapv_inplace(|v| v.max(0.0));
            activations.push(z.clone());
            a = z;
        }
        let vl = self.value_layer();
        let mut value = a.dot(&vl.weights);
        value += &vl.biases;
        let al = self.advantage_layer();
        let mut adv = a.dot(&al.weights);
        adv += &al.biases;
        let mean_adv = adv.mean_axis(Axis(1)).expect("non-empty actions");
        let mut q = adv.clone();
        for (mut row, (&m, &v)) in q
            .axis_iter_mut(Axis(0))
            .zip(mean_adv.iter().zip(value.column(0).iter()))
        {
            row.mapv_inplace(|x| x - m + v);
        }
        (q, ForwardCache { activations, advantages: adv })
    }

    /// Backpropagate `d_loss/d_Q` through the network; returns the gradient
    /// with the same layer layout as `params`.
    pub(crate) fn backward(&self, cache: &ForwardCache, dq: &Array2<f64>) -> LayeredParams {
        let num_actions = self.num_actions as f64;
        let row_sum = dq.sum_axis(Axis(1));
        // Merge backward: dV = sum_a dQ, dA = dQ - rowsum(dQ)/|A|.
        let dv = Array2::from_shape_fn((dq.nrows(), 1), |(i, _)| row_sum[i]);
        let mut da = dq.clone();
        for (mut row, &s) in da.axis_iter_mut(Axis(0)).zip(row_sum.iter()) {
            row.mapv_inplace(|x| x - s / num_actions);
        }
        let _ = &cache.advantages;

        let trunk_out = &cache.activations[self.num_trunk];
        let mut grad_layers: Vec<Layer> =
            self.params.layers.iter().map(|l| Layer::zeros(l.in_dim(), l.out_dim())).collect();

        grad_layers[self.num_trunk].weights = trunk_out.t().dot(&dv);
        grad_layers[self.num_trunk].biases = dv.sum_axis(Axis(0));
        grad_layers[self.num_trunk + 1].weights = trunk_out.t().dot(&da);
        grad_layers[self.num_trunk + 1].biases = da.sum_axis(Axis(0));

        let mut d_act = dv.dot(&self.value_layer().weights.t())
            + da.dot(&self.advantage_layer().weights.t());
        for i in (0..self.num_trunk).rev() {
            // ReLU derivative from the post-activation values.
            let post = &cache.activations[i + 1];
            let dz = Array2::from_shape_fn(d_act.raw_dim(), |(r, c)| {
                if post[[r, c]] > 0.0 {
                    d_act[[r, c]]
                } else {
                    0.0
                }
            });
            let prev = &cache.activations[i];
            grad_layers[i].weights = prev.t().dot(&dz);
            grad_layers[i].biases = dz.sum_axis(Axis(0));
            d_act = dz.dot(&self.params.layers[i].weights.t());
        }
        LayeredParams { layers: grad_layers }
    }
}

fn init_layer(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Layer {
    let limit = 1.0 / (in_dim as f64).sqrt();
    let mut layer = Layer::zeros(in_dim, out_dim);
    for w in layer.weights.iter_mut() {
        *w = rng.gen_range(-limit..limit);
    }
    for b in layer.biases.iter_mut() {
        *b = rng.gen_range(-limit..limit);
    }
    layer
}
