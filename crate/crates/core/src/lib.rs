//! Multi-trip route planning for rechargeable vehicles on multi-depot road
//! graphs, mission simulation under vehicle failures, and centralized
//! auction-based rescheduling of the trips failed vehicles leave behind.

pub mod auction;
pub mod carp;
pub mod depot_routes;
pub mod error;
pub mod exact;
pub mod failures;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod metrics;
pub mod network;
pub mod pipeline;
pub mod planner;
pub mod routing;
pub mod simulator;
pub mod time;

pub use error::{Error, Result};
pub use time::TimeUnits;
