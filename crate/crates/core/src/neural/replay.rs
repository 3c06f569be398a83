use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// One replay-memory record.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Seeded ring buffer with uniform mini-batch sampling (without
/// replacement within a batch).
pub struct ReplayMemory {
    capacity: usize,
    buffer: Vec<Experience>,
    write: usize,
    rng: ChaCha8Rng,
}

impl ReplayMemory {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            buffer: Vec::with_capacity(capacity),
            write: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn push(&mut self, exp: Experience) {
        if self.buffer.len() < self.capacity {
            self.buffer.push(exp);
        } else {
            self.buffer[self.write] = exp;
        }
        self.write = (self.write + 1) % self.capacity;
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Uniform sample of `batch` distinct indices (partial Fisher-Yates).
    pub fn sample(&mut self, batch: usize) -> Vec<&Experience> {
        let n = self.buffer.len();
        let batch = batch.min(n);
        let mut indices: Vec<usize> = (0..n).collect();
        for i in 0..batch {
            let j = self.rng.gen_range(i..n);
            indices.swap(i, j);
        }
        indices[..batch].iter().map(|&i| &self.buffer[i]).collect()
    }
}
