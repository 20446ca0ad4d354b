//! A deterministic 2D robot-learning workbench.
//!
//! The crate bundles a differential-drive robot simulator with ray-cast IR
//! sensing and a synthetic colour camera ([`worldsim`]), a blob detector and
//! state discretizers ([`perception`]), a tabular Q-learning engine
//! ([`qcore`]), the three experiment definitions with their curriculum
//! ([`tasks`]) and a per-epoch metrics pipeline with CSV and SVG output
//! ([`metrics`]).

pub mod error;
pub mod geometry;
pub mod metrics;
pub mod perception;
pub mod qcore;
pub mod rng;
pub mod tasks;
pub mod worldsim;

pub use error::{Error, Result};
