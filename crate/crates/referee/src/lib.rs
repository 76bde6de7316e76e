//! Networked referee for two-party games.
//!
//! The referee accepts one connection per player, hands each player only
//! its own input, collects the outputs, adjudicates and logs every round.
//! Players connect only to the referee, never to each other.
//!
//! Entanglement is modelled inside the referee: each round it holds a fresh
//! copy of the shared state, and each player may send one
//! `entangle_request` naming a local operation on its own half. The
//! referee applies it, measures that half and returns the outcome. This
//! reproduces the statistics of a shared entangled state. It is not a
//! nonlocal channel, and the request never carries the other player's data.

pub mod config;
pub mod error;
pub mod log;
pub mod player;
pub mod server;
pub mod wire;

pub use config::{SamplerConfig, SessionConfig};
pub use error::{RefereeError, Result};
pub use log::SessionLog;
pub use player::{player_join, player_run, PlayerOptions, PlayerReport, StrategyBuilder};
pub use server::{serve, serve_with_sampler, Endpoint, SessionOutcome};
pub use wire::{WireMessage, PROTOCOL_VERSION};
