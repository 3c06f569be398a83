//! Simulator of cooperative edge caching in a fog radio access network.
//!
//! Each fog access point (F-AP) serves content requests from nearby users,
//! learns a cache-replacement policy with a dueling deep Q-network, and a
//! federation layer periodically aggregates pruned, codebook-quantized
//! model deltas across F-APs. A strongly convex federated-SGD testbed
//! numerically checks the convergence bounds the aggregation scheme relies
//! on.

pub mod agents;
pub mod compress;
pub mod convergence;
pub mod env;
pub mod error;
pub mod federation;
pub mod neural;
pub mod seeding;
pub mod sim;

pub use error::{Error, Result};
