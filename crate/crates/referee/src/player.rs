//! The player side of a session: connect, say hello, answer every round.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use telepathy_core::games::strategy::SharedRandomness;
use telepathy_core::games::{GameKind, LocalOperation, Role, RoundResource, Strategy};
use telepathy_core::BitString;

use crate::error::{RefereeError, Result};
use crate::wire::{decode, encode, WireMessage, PROTOCOL_VERSION};

#[derive(Clone, Debug)]
pub struct PlayerOptions {
    /// Seed of the pre-agreed shared random string, if the strategy uses one.
    /// Both players must pass the same value.
    pub shared_seed: Option<u64>,
    /// How long to keep retrying the initial connection.
    pub connect_timeout: Duration,
    /// Longest wait for any single message from the referee.
    pub read_timeout: Duration,
}

impl Default for PlayerOptions {
    fn default() -> Self {
        PlayerOptions {
            shared_seed: None,
            connect_timeout: Duration::from_secs(10),
            read_timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Sent,
    Received,
}

#[derive(Clone, Debug, Default)]
pub struct PlayerReport {
    pub rounds_played: u64,
    pub wins: u64,
    pub losses: u64,
    /// Every line this player sent or received, in order.
    pub transcript: Vec<(Direction, String)>,
}

struct PlayerConn {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    transcript: Vec<(Direction, String)>,
}

impl PlayerConn {
    fn send(&mut self, msg: &WireMessage) -> Result<()> {
        let line = encode(msg);
        self.writer.write_all(line.as_bytes())?;
        self.transcript.push((Direction::Sent, line.trim_end().to_string()));
        Ok(())
    }

    fn recv(&mut self) -> Result<WireMessage> {
        let mut line = String::new();
        loop {
            line.clear();
            if self.reader.read_line(&mut line)? == 0 {
                return Err(RefereeError::ConnectionClosed("referee".into()));
            }
            if !line.trim().is_empty() {
                break;
            }
        }
        self.transcript.push((Direction::Received, line.trim_end().to_string()));
        decode(&line)
    }

    fn fail<T>(&mut self, err: RefereeError) -> Result<T> {
        let _ = self.send(&WireMessage::Error {
            message: err.to_string(),
        });
        Err(err)
    }
}

/// Connects to the referee at `endpoint` (`host:port`) and plays until the
/// referee sends its summary. A strategy failure is reported to the referee
/// and returned as an error.
pub fn player_run(
    role: Role,
    strategy: &mut dyn Strategy,
    endpoint: &str,
    opts: &PlayerOptions,
) -> Result<PlayerReport> {
    let id = strategy.id();
    connect_and_play(role, id, Source::Borrowed(strategy), endpoint, opts)
}

/// Factory for strategies that depend on the game announced in `ready`.
pub type StrategyBuilder<'a> =
    Box<dyn FnOnce(&GameKind) -> telepathy_core::Result<Box<dyn Strategy>> + 'a>;

/// Like [`player_run`], but builds the strategy once the referee has named
/// the game. `name` is sent in `hello`.
pub fn player_join(
    role: Role,
    name: &str,
    build: StrategyBuilder<'_>,
    endpoint: &str,
    opts: &PlayerOptions,
) -> Result<PlayerReport> {
    connect_and_play(role, name.to_string(), Source::Build(build), endpoint, opts)
}

enum Source<'a> {
    Borrowed(&'a mut dyn Strategy),
    Build(StrategyBuilder<'a>),
}

fn connect_and_play(
    role: Role,
    hello_id: String,
    source: Source<'_>,
    endpoint: &str,
    opts: &PlayerOptions,
) -> Result<PlayerReport> {
    let stream = connect(endpoint, opts.connect_timeout)?;
    stream.set_read_timeout(Some(opts.read_timeout))?;
    let _ = stream.set_nodelay(true);
    let mut conn = PlayerConn {
        reader: BufReader::new(stream.try_clone()?),
        writer: stream,
        transcript: Vec::new(),
    };
    let result = play(role, hello_id, source, &mut conn, opts);
    let transcript = std::mem::take(&mut conn.transcript);
    result.map(|mut report| {
        report.transcript = transcript;
        report
    })
}

fn play(
    role: Role,
    hello_id: String,
    source: Source<'_>,
    conn: &mut PlayerConn,
    opts: &PlayerOptions,
) -> Result<PlayerReport> {
    conn.send(&WireMessage::Hello {
        protocol_version: PROTOCOL_VERSION.into(),
        role,
        strategy: hello_id,
    })?;
    let (game, rounds) = match conn.recv()? {
        WireMessage::Ready { protocol_version, role: r, game, rounds } => {
            if protocol_version != PROTOCOL_VERSION || r != role {
                return conn.fail(RefereeError::Protocol(format!(
                    "ready for {r} with protocol {protocol_version:?}"
                )));
            }
            (game, rounds)
        }
        WireMessage::Error { message } => return Err(RefereeError::Remote(message)),
        other => {
            return conn.fail(RefereeError::Protocol(format!("expected ready, got {}", other.kind())))
        }
    };
    let mut owned;
    let strategy: &mut dyn Strategy = match source {
        Source::Borrowed(s) => s,
        Source::Build(build) => match build(&game) {
            Ok(s) => {
                owned = s;
                owned.as_mut()
            }
            Err(e) => return conn.fail(e.into()),
        },
    };
    let shared = opts
        .shared_seed
        .map(|s| SharedRandomness::generate(s, rounds as usize));

    let mut report = PlayerReport::default();
    loop {
        match conn.recv()? {
            WireMessage::RoundInput { round_index, input } => {
                let mut res = WireResource {
                    conn: &mut *conn,
                    round: round_index,
                    shared: shared.as_ref(),
                };
                match strategy.respond(round_index, &input, &mut res) {
                    Ok(output) => conn.send(&WireMessage::RoundOutput { round_index, output })?,
                    Err(e) => return conn.fail(e.into()),
                }
            }
            WireMessage::Verdict { won, .. } => {
                report.rounds_played += 1;
                if won {
                    report.wins += 1;
                } else {
                    report.losses += 1;
                }
            }
            WireMessage::Summary { .. } => return Ok(report),
            WireMessage::Error { message } => return Err(RefereeError::Remote(message)),
            other => {
                return conn.fail(RefereeError::Protocol(format!("unexpected {}", other.kind())))
            }
        }
    }
}

fn connect(endpoint: &str, timeout: Duration) -> Result<TcpStream> {
    let deadline = Instant::now() + timeout;
    loop {
        match TcpStream::connect(endpoint) {
            Ok(s) => return Ok(s),
            Err(e) if Instant::now() >= deadline => return Err(e.into()),
            Err(_) => thread::sleep(Duration::from_millis(20)),
        }
    }
}

/// Shared resources as seen over the wire: `λ` is local, entanglement is a
/// round trip to the referee.
struct WireResource<'a> {
    conn: &'a mut PlayerConn,
    round: u64,
    shared: Option<&'a SharedRandomness>,
}

impl RoundResource for WireResource<'_> {
    fn shared_bit(&mut self) -> telepathy_core::Result<u8> {
        self.shared
            .ok_or_else(|| telepathy_core::Error::Protocol("no shared random string was agreed".into()))?
            .bit(self.round)
    }

    fn measure(&mut self, op: LocalOperation) -> telepathy_core::Result<BitString> {
        let to_core = |e: RefereeError| telepathy_core::Error::Protocol(e.to_string());
        self.conn
            .send(&WireMessage::EntangleRequest {
                round_index: self.round,
                operation: op,
            })
            .map_err(to_core)?;
        match self.conn.recv().map_err(to_core)? {
            WireMessage::EntangleResult { round_index, outcome } if round_index == self.round => Ok(outcome),
            WireMessage::Error { message } => Err(telepathy_core::Error::Protocol(message)),
            other => Err(telepathy_core::Error::Protocol(format!(
                "expected entangle_result, got {}",
                other.kind()
            ))),
        }
    }
}
