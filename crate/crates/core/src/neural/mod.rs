//! A minimal dense feedforward network with a dueling head, mean-squared
//! Bellman loss, plain SGD and target-network synchronization. No external
//! ML framework; 64-bit floats throughout.

mod net;
mod params;
mod replay;
mod train;

pub use net::DuelingNet;
pub use params::{Layer, LayeredParams};
pub use replay::{Experience, ReplayMemory};
pub use train::{sgd_step, sync_target, td_loss};
