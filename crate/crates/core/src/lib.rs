//! Node placement for wireless powered communication networks.
//!
//! Devices harvest RF energy from energy nodes (ENs) on the downlink and
//! transmit to access points (APs) on the uplink. The goal is to place ENs
//! and APs (or co-located hybrid access points, HAPs) so that every device
//! keeps a non-negative net harvesting rate at minimum deployment cost.

pub mod baselines;
pub mod bisection;
pub mod cli;
pub mod clustering;
pub mod error;
pub mod geometry;
pub mod hap;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod planner;
pub mod separated;

pub use error::{Error, Result};
pub use model::{ChannelParams, Costs, Device, Metrics, Placement, Point2, Region, Scenario};
