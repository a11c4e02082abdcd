//! Monte Carlo simulator of directional spectrum sharing in unlicensed mmWave
//! bands.
//!
//! The crate models K BS-MT pairs operating downlink in a shared channel and
//! evaluates which pairs get to reuse the spectrum under six channel access
//! procedures: omnidirectional or directional listen-before-talk at the base
//! station, optionally complemented by an omnidirectional or directional
//! listen-before-receive at the mobile terminal.
//!
//! Modules, bottom-up:
//!
//! - [`deployment`]: random placement of BS-MT pairs and global radio parameters
//! - [`antenna`]: ULA steering vectors, the multipath channel matrix and the
//!   cone-plus-circle pattern approximation
//! - [`linkbudget`]: pathloss, received power, interference and Shannon rate
//! - [`access`]: carrier-sense primitives and the snapshot admission procedure
//! - [`slots`]: NR numerologies, self-contained slot layouts and the
//!   RtoTx/RtoRx call flow
//! - [`montecarlo`]: repeated trials, metric aggregation and parameter sweeps

pub mod access;
pub mod antenna;
pub mod deployment;
mod error;
pub mod linkbudget;
pub mod montecarlo;
pub mod slots;
pub mod units;

pub use access::{AccessScheme, SchemeKind, SenseMode, SnapshotResult, Thresholds};
pub use antenna::BeamPattern;
pub use deployment::{BeamConfig, NodePlacement, Scenario, ScenarioParams};
pub use error::{Error, Result};
pub use linkbudget::{LinkPower, RateResult};
pub use montecarlo::{MetricsRecord, SweepConfig, SweepVariable};
pub use slots::{CallFlowTrace, NumerologyConfig, SlotLayout};
