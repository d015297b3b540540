//! Prescribed-performance trajectory tracking for an underactuated quadrotor.
//!
//! The controller is a four-stage cascade (position, velocity, attitude,
//! angular rate). Each stage confines its tracking error to a shrinking
//! exponential funnel by feeding back an `atanh`-transformed normalized
//! error. It uses no model parameters: mass, inertia and disturbances live
//! only in [`plant`], which [`sim`] integrates in closed loop.
//!
//! ```
//! use funnelquad::config;
//! use funnelquad::sim;
//!
//! let mut cfg = config::preset("ascent").unwrap();
//! cfg.duration = 0.5;
//! let report = sim::run(&cfg).unwrap();
//! assert!(report.is_compliant());
//! ```

pub mod attitude;
pub mod cli;
pub mod config;
pub mod controller;
pub mod error;
pub mod funnel;
pub mod output;
pub mod plant;
pub mod sim;
pub mod trajectories;
