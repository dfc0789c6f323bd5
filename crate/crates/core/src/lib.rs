//! Decision making of autonomous vehicles at a four-way unsignalized
//! intersection, with vehicles that may ignore the right of way.
//!
//! Every rational vehicle keeps a private priority order over the vehicles
//! around it, builds a one-round sequential game whose decision order is that
//! priority order, and applies the first acceleration of its backward-induction
//! equilibrium pattern (receding horizon). Malicious vehicles differ in how they
//! initialise and update their orders; irrational ones accelerate at random.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, batch execution and
//! the command-line interface live in the `intersim` crate.

#![cfg_attr(not(test), no_std)]
// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod agent;
pub mod config;
pub mod cost;
pub mod error;
pub mod game;
pub mod geometry;
pub mod kinematics;
pub mod priority;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod stats;

pub use agent::{AgentState, DriverKind};
pub use config::SimConfig;
pub use cost::CostParams;
pub use error::Error;
pub use game::{PatternSet, SequentialGame, StrategyProfile};
pub use geometry::{Arm, IntersectionLayout, Maneuver, NavigationPath};
pub use kinematics::{Configuration, Status, VehicleDims, VehicleId, VehicleSpec};
pub use priority::PriorityOrder;
pub use scenario::{Case, Scenario};
pub use sim::{run, SimResult};
pub use stats::AggregateStats;

pub type Result<T, E = Error> = core::result::Result<T, E>;
