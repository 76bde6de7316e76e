//! Newline-delimited JSON messages, UTF-8, one object per line.
//!
//! Bit strings are literal `0`/`1` text with `x₀` first. Unknown fields are
//! ignored; an unknown `type` is a protocol error.

use serde::{Deserialize, Serialize};
use telepathy_core::games::{GameKind, LocalOperation, Role};
use telepathy_core::BitString;

use crate::error::{RefereeError, Result};

pub const PROTOCOL_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    /// player → referee, first message.
    Hello {
        protocol_version: String,
        role: Role,
        strategy: String,
    },
    /// referee → player, answers `hello`.
    Ready {
        protocol_version: String,
        role: Role,
        game: GameKind,
        rounds: u64,
    },
    RoundInput {
        round_index: u64,
        input: BitString,
    },
    /// player → referee: act on and measure this player's half of the round's shared state.
    EntangleRequest {
        round_index: u64,
        operation: LocalOperation,
    },
    EntangleResult {
        round_index: u64,
        outcome: BitString,
    },
    RoundOutput {
        round_index: u64,
        output: BitString,
    },
    Verdict {
        round_index: u64,
        won: bool,
        promise_held: bool,
        protocol_error: bool,
    },
    Summary {
        rounds: u64,
        wins: u64,
        losses: u64,
        promise_violations: u64,
        protocol_errors: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        aborted: Option<String>,
    },
    Error {
        message: String,
    },
}

impl WireMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            WireMessage::Hello { .. } => "hello",
            WireMessage::Ready { .. } => "ready",
            WireMessage::RoundInput { .. } => "round_input",
            WireMessage::EntangleRequest { .. } => "entangle_request",
            WireMessage::EntangleResult { .. } => "entangle_result",
            WireMessage::RoundOutput { .. } => "round_output",
            WireMessage::Verdict { .. } => "verdict",
            WireMessage::Summary { .. } => "summary",
            WireMessage::Error { .. } => "error",
        }
    }
}

/// One line of JSON, newline included.
pub fn encode(msg: &WireMessage) -> String {
    let mut line = serde_json::to_string(msg).expect("wire messages always serialize");
    line.push('\n');
    line
}

pub fn decode(line: &str) -> Result<WireMessage> {
    serde_json::from_str(line.trim_end_matches(['\n', '\r']))
        .map_err(|e| RefereeError::Malformed(format!("{e}: {line:?}")))
}
