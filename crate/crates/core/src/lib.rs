//! Decentralised pulse-coupled swarmalator simulation.
//!
//! The crate holds three oscillator models and the machinery around them:
//!
//! - [`pulse`]: pulse-coupled oscillators with absorption, the seed model.
//! - [`swarmalator`]: the all-to-all swarmalator, used as an oracle.
//! - [`drone`] and [`swarm`]: the pairwise, pulse-driven drone model that
//!   talks only over the shared [`netsim`] broadcast medium, with
//!   [`smoothing`] of movement commands and a hidden phase that staggers
//!   transmissions.
//!
//! [`scenario`], [`runner`] and [`trace`] turn a configuration file into
//! deterministic CSV traces.

// `!(x > 0.0)` style checks are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drone;
pub mod error;
pub mod math;
pub mod metrics;
pub mod netsim;
pub mod pulse;
pub mod runner;
pub mod scenario;
pub mod smoothing;
pub mod swarm;
pub mod swarmalator;
pub mod trace;

pub use drone::{DroneParams, DroneState};
pub use error::{ConfigError, MathError, MetricsError, SimError, TraceError};
pub use math::{circ_diff, seeded_rng, wrap_angle, Angle, SimRng, UnitPhase, Vec2};
pub use metrics::{FormationTarget, SpacingSample, SyncSample};
pub use netsim::{BroadcastMedium, CollisionPolicy, PulseMessage};
pub use pulse::PulsePopulation;
pub use runner::{run_scenario, RunOutput, RunSummary};
pub use scenario::{Model, ScenarioConfig};
pub use smoothing::{ExponentialFilter, MovingAverageFilter, SmoothingMode};
pub use swarm::DroneSwarm;
pub use swarmalator::{SwarmParams, Swarmalator};
