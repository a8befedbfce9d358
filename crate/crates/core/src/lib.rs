//! Distributed coalition formation for collaborative spectrum sensing.
//!
//! Secondary users (SUs) of a cognitive radio network sense a single primary
//! user (PU) with energy detectors. Nearby SUs can pool their one-bit
//! decisions at a coalition head that fuses them with the OR rule, lowering
//! the missing probability at the price of a higher false-alarm probability.
//!
//! The crate is layered bottom-up:
//!
//! - [`network`]: radio constants, positions and the deployed network.
//! - [`sensing`]: closed-form detection, false-alarm, missing and reporting
//!   error probabilities, for single SUs and for OR-fused coalitions.
//! - [`game`]: the non-transferable-utility game: barrier cost, coalition
//!   value, Pareto order and the coalition-size bound.
//! - [`formation`]: partitions, merge-and-split passes, stability checkers and
//!   a registry of formation strategies selectable by name.
//! - [`oracle`]: exact centralized benchmark by set-partition enumeration.
//! - [`scenario`]: random deployments, sweeps, mobility runs, Monte-Carlo
//!   validation and CSV output.
//! - [`cli`]: the `coalsense` command-line front end.

pub mod cli;
pub mod error;
pub mod formation;
pub mod game;
pub mod network;
pub mod oracle;
pub mod scenario;
pub mod sensing;

pub use error::{Error, Result};
