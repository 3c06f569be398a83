//! The simulated world: content catalog, request popularity, cache states,
//! transmission delays and the per-request service path.

mod catalog;
mod delay;
mod fap;
mod world;

pub use catalog::{build_popularity, Catalog, PopularityModel};
pub use delay::{downlink_rate, user_delay, DelayModel};
pub use fap::{apply_cache_update, FapState};
pub use world::{
    reward, serve_request, RequestEvent, ServiceOutcome, SlotDelays, World,
};
