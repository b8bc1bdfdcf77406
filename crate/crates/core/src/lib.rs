//! Latency-constrained fronthaul compression control for a C-RAN downlink.
//!
//! The crate provides the fronthaul load model ([`fronthaul`]), a slot-driven
//! simulator of `K` cells sharing one fronthaul link ([`traffic`],
//! [`latency`], [`env`]), a double-DQN controller with prioritized replay
//! ([`qnet`], [`agent`]), exhaustive baselines ([`oracle`]) and the run
//! orchestration behind the `fhc` command-line tool ([`config`], [`run`]).

// Negated float comparisons reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod config;
pub mod env;
pub mod error;
pub mod fronthaul;
pub mod latency;
pub mod oracle;
pub mod qnet;
pub mod run;
pub mod traffic;

pub use error::{Error, Result};
