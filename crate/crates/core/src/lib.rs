//! Agent-based tax evasion game.
//!
//! Taxpayers donate to random fellow players (game A), evaders gamble on
//! not being audited (game B) and mixed players alternate between the two.
//! With adaptation enabled, players drift between categories through a
//! believeness variable driven by their neighbours on a small-world network
//! and by their own capital.
//!
//! Module map:
//! - [`params`]: constants, player state, validation
//! - [`rng`]: per-run deterministic streams
//! - [`engine`]: one turn of the base game
//! - [`network`]: complete graph and Watts–Strogatz small world
//! - [`adaptation`]: believeness updates and category switching
//! - [`sim`]: whole runs and their time series
//! - [`harness`]: sweeps, thresholds and critical-fraction search
//! - [`config`], [`output`], [`cli`]: command-line front end

pub mod adaptation;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod harness;
pub mod network;
pub mod output;
pub mod params;
pub mod rng;
pub mod sim;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{Error, Result};
pub use network::{build_graph, SocialGraph, Topology};
pub use params::{BelievenessInit, Category, ExitBelieveness, Params, PlayerState, UpdateOrder};
pub use sim::{run_adaptive, run_fixed, InitialFractions, RunResult, TurnRecord};
