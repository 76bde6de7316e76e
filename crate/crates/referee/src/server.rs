//! The referee side of a session.
//!
//! One reader thread per connection feeds a channel; the session loop owns
//! all writes. Per round, each player gets its own input, may send one
//! `entangle_request`, and sends one `round_output`. Entangle requests are
//! held until both players have either asked or answered, then served
//! Alice first, so the measurement draws line up with in-process play.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use telepathy_core::games::play::{InputSampler, MEASUREMENT_STREAM};
use telepathy_core::games::{EntangledRound, LocalOperation, Role, RoundRecord};
use telepathy_core::{BitString, RandomSource};

use crate::config::SessionConfig;
use crate::error::Result;
use crate::log::{LogHeader, LogLine, LogSummary, LogWriter, SessionLog};
use crate::wire::{decode, encode, WireMessage, PROTOCOL_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Referee,
    Alice,
    Bob,
}

impl From<Role> for Endpoint {
    fn from(r: Role) -> Self {
        match r {
            Role::Alice => Endpoint::Alice,
            Role::Bob => Endpoint::Bob,
        }
    }
}

/// One message as it crossed the wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapturedMessage {
    pub from: Endpoint,
    pub to: Endpoint,
    pub line: String,
}

#[derive(Clone, Debug)]
pub struct SessionOutcome {
    pub log: SessionLog,
    pub capture: Vec<CapturedMessage>,
    pub aborted: Option<String>,
}

enum Event {
    Line(usize, String),
    Closed(usize, Option<io::Error>),
}

struct Conn {
    writer: TcpStream,
    role: Option<Role>,
    reader: Option<JoinHandle<()>>,
}

/// Runs one session on `listener` with the sampler named in `config`.
pub fn serve(config: &SessionConfig, listener: TcpListener) -> Result<SessionOutcome> {
    let sampler = config.sampler()?;
    serve_with_sampler(config, listener, sampler)
}

/// Runs one session with an explicit input sampler. The logged config still
/// describes the default sampler, so replay of such a log only holds when
/// the two agree.
pub fn serve_with_sampler(
    config: &SessionConfig,
    listener: TcpListener,
    sampler: Box<dyn InputSampler>,
) -> Result<SessionOutcome> {
    config.validate()?;
    let mut log = match &config.log_path {
        Some(p) => Some(LogWriter::create(p)?),
        None => None,
    };
    let header = LogHeader {
        protocol_version: PROTOCOL_VERSION.into(),
        rng_algorithm: RandomSource::ALGORITHM.into(),
        config: config.clone(),
        started_unix_ms: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64),
    };
    if let Some(w) = log.as_mut() {
        w.write(&LogLine::Header(header.clone()))?;
    }

    let (tx, rx) = mpsc::channel();
    let mut session = Session {
        config,
        sampler,
        conns: Vec::new(),
        rx,
        capture: Vec::new(),
        records: Vec::new(),
        log: log.as_mut(),
        strategy_id: String::new(),
    };
    let aborted = session.run(&listener, tx).err();
    if let Some(reason) = &aborted {
        session.broadcast(&WireMessage::Error {
            message: reason.clone(),
        });
    }
    let summary = LogSummary::from_records(&session.records, aborted.clone());
    if aborted.is_none() {
        session.broadcast(&WireMessage::Summary {
            rounds: summary.rounds,
            wins: summary.wins,
            losses: summary.losses,
            promise_violations: summary.promise_violations,
            protocol_errors: summary.protocol_errors,
            aborted: None,
        });
    }
    if let Some(w) = session.log.as_mut() {
        w.write(&LogLine::Summary(summary.clone()))?;
    }
    session.close();
    Ok(SessionOutcome {
        log: SessionLog {
            header,
            records: session.records,
            summary: Some(summary),
        },
        capture: session.capture,
        aborted,
    })
}

struct Session<'a> {
    config: &'a SessionConfig,
    sampler: Box<dyn InputSampler>,
    conns: Vec<Conn>,
    rx: Receiver<Event>,
    capture: Vec<CapturedMessage>,
    records: Vec<RoundRecord>,
    log: Option<&'a mut LogWriter>,
    strategy_id: String,
}

/// Result of the session loop; `Err` carries the abort reason.
type Step<T> = std::result::Result<T, String>;

impl Session<'_> {
    fn run(&mut self, listener: &TcpListener, tx: Sender<Event>) -> Step<()> {
        let deadline = Instant::now() + Duration::from_millis(self.config.connect_timeout_ms);
        self.accept(listener, tx, deadline)?;
        self.handshake(deadline)?;

        let game = self.config.game;
        let seed = self.config.seed;
        let mut input_rng = RandomSource::new(seed);
        let mut measure_rng = RandomSource::with_stream(seed, MEASUREMENT_STREAM);
        let timeout = Duration::from_millis(self.config.timeout_ms);
        for i in 0..self.config.rounds {
            let (x, y) = self
                .sampler
                .sample(&mut input_rng)
                .map_err(|e| format!("input sampler failed: {e}"))?;
            self.send(Role::Alice, &WireMessage::RoundInput { round_index: i, input: x.clone() })?;
            self.send(Role::Bob, &WireMessage::RoundInput { round_index: i, input: y.clone() })?;
            let [a, b] = self.collect_round(i, &mut measure_rng, Instant::now() + timeout)?;
            let rec = RoundRecord::adjudicate(&game, i, x, y, a, b, self.strategy_id.clone(), seed);
            let verdict = WireMessage::Verdict {
                round_index: i,
                won: rec.won,
                promise_held: rec.promise_held,
                protocol_error: rec.protocol_error,
            };
            self.send(Role::Alice, &verdict)?;
            self.send(Role::Bob, &verdict)?;
            if let Some(w) = self.log.as_mut() {
                w.write(&LogLine::Round(rec.clone()))
                    .map_err(|e| format!("writing log: {e}"))?;
            }
            self.records.push(rec);
        }
        Ok(())
    }

    fn accept(&mut self, listener: &TcpListener, tx: Sender<Event>, deadline: Instant) -> Step<()> {
        listener.set_nonblocking(true).map_err(|e| e.to_string())?;
        while self.conns.len() < 2 {
            match listener.accept() {
                Ok((stream, _)) => {
                    let idx = self.conns.len();
                    stream.set_nonblocking(false).map_err(|e| e.to_string())?;
                    let _ = stream.set_nodelay(true);
                    let read_half = stream.try_clone().map_err(|e| e.to_string())?;
                    let tx = tx.clone();
                    let reader = thread::spawn(move || read_lines(idx, read_half, tx));
                    self.conns.push(Conn {
                        writer: stream,
                        role: None,
                        reader: Some(reader),
                    });
                }
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                    if Instant::now() >= deadline {
                        return Err(format!(
                            "only {} of 2 players connected before the deadline",
                            self.conns.len()
                        ));
                    }
                    thread::sleep(Duration::from_millis(5));
                }
                Err(e) => return Err(format!("accept failed: {e}")),
            }
        }
        Ok(())
    }

    fn handshake(&mut self, deadline: Instant) -> Step<()> {
        let mut ids = [String::new(), String::new()];
        let mut greeted = 0;
        while greeted < 2 {
            let (idx, text) = self.next_line(deadline, "hello")?;
            let msg = decode(&text).map_err(|e| e.to_string())?;
            let WireMessage::Hello { protocol_version, role, strategy } = msg else {
                return Err(format!("expected hello, got {}", msg.kind()));
            };
            if self.conns[idx].role.is_some() {
                return Err("duplicate hello".into());
            }
            self.capture.push(CapturedMessage { from: role.into(), to: Endpoint::Referee, line: text });
            if protocol_version != PROTOCOL_VERSION {
                return Err(format!("unsupported protocol version {protocol_version:?}"));
            }
            if self.conns.iter().any(|c| c.role == Some(role)) {
                return Err(format!("two players claimed the role {role}"));
            }
            self.conns[idx].role = Some(role);
            ids[role as usize] = strategy;
            greeted += 1;
        }
        self.strategy_id = format!("{}/{}", ids[0], ids[1]);
        for role in [Role::Alice, Role::Bob] {
            self.send(
                role,
                &WireMessage::Ready {
                    protocol_version: PROTOCOL_VERSION.into(),
                    role,
                    game: self.config.game,
                    rounds: self.config.rounds,
                },
            )?;
        }
        Ok(())
    }

    fn collect_round(
        &mut self,
        round: u64,
        measure_rng: &mut RandomSource,
        deadline: Instant,
    ) -> Step<[BitString; 2]> {
        let mut entangled = EntangledRound::new(self.config.game.qubits_per_player())
            .map_err(|e| e.to_string())?;
        let mut pending: [Option<LocalOperation>; 2] = [None, None];
        let mut served = [false; 2];
        let mut outputs: [Option<BitString>; 2] = [None, None];
        while outputs.iter().any(Option::is_none) {
            let (idx, text) = self.next_line(deadline, &format!("round {round}"))?;
            let role = self.conns[idx].role.expect("roles assigned at handshake");
            self.capture.push(CapturedMessage {
                from: role.into(),
                to: Endpoint::Referee,
                line: text.clone(),
            });
            let r = role as usize;
            let msg = decode(&text).map_err(|e| format!("from {role}: {e}"))?;
            match msg {
                WireMessage::EntangleRequest { round_index, operation } => {
                    check_round(role, round, round_index)?;
                    if pending[r].is_some() || served[r] || outputs[r].is_some() {
                        return Err(format!("{role} sent a second entangle_request in round {round}"));
                    }
                    pending[r] = Some(operation);
                }
                WireMessage::RoundOutput { round_index, output } => {
                    check_round(role, round, round_index)?;
                    if outputs[r].is_some() {
                        return Err(format!("{role} answered round {round} twice"));
                    }
                    if pending[r].is_some() {
                        return Err(format!("{role} answered before its entangle_result"));
                    }
                    outputs[r] = Some(output);
                }
                WireMessage::Error { message } => return Err(format!("{role} reported: {message}")),
                other => return Err(format!("unexpected {} from {role}", other.kind())),
            }
            let settled = (0..2).all(|k| pending[k].is_some() || served[k] || outputs[k].is_some());
            if settled {
                for who in [Role::Alice, Role::Bob] {
                    if let Some(op) = pending[who as usize].take() {
                        let outcome = entangled
                            .measure(who, &op, measure_rng)
                            .map_err(|e| format!("entangle_request from {who}: {e}"))?;
                        served[who as usize] = true;
                        self.send(who, &WireMessage::EntangleResult { round_index: round, outcome })?;
                    }
                }
            }
        }
        let [a, b] = outputs;
        Ok([a.expect("loop exits once both answered"), b.expect("loop exits once both answered")])
    }

    fn next_line(&mut self, deadline: Instant, waiting_for: &str) -> Step<(usize, String)> {
        let left = deadline.saturating_duration_since(Instant::now());
        match self.rx.recv_timeout(left) {
            Ok(Event::Line(idx, text)) => Ok((idx, text)),
            Ok(Event::Closed(idx, err)) => {
                let who = self.conns[idx].role.map_or("a player".to_string(), |r| r.to_string());
                Err(match err {
                    Some(e) => format!("{who} disconnected during {waiting_for}: {e}"),
                    None => format!("{who} disconnected during {waiting_for}"),
                })
            }
            Err(RecvTimeoutError::Timeout) => Err(format!("timed out waiting for {waiting_for}")),
            Err(RecvTimeoutError::Disconnected) => Err("all connections closed".into()),
        }
    }

    fn send(&mut self, role: Role, msg: &WireMessage) -> Step<()> {
        let line = encode(msg);
        let conn = self
            .conns
            .iter_mut()
            .find(|c| c.role == Some(role))
            .ok_or_else(|| format!("{role} is not connected"))?;
        conn.writer
            .write_all(line.as_bytes())
            .map_err(|e| format!("lost connection to {role}: {e}"))?;
        self.capture.push(CapturedMessage {
            from: Endpoint::Referee,
            to: role.into(),
            line: line.trim_end().to_string(),
        });
        Ok(())
    }

    /// Best effort: used on the way out, when a peer may already be gone.
    fn broadcast(&mut self, msg: &WireMessage) {
        let line = encode(msg);
        for c in &mut self.conns {
            if c.writer.write_all(line.as_bytes()).is_ok() {
                if let Some(role) = c.role {
                    self.capture.push(CapturedMessage {
                        from: Endpoint::Referee,
                        to: role.into(),
                        line: line.trim_end().to_string(),
                    });
                }
            }
        }
    }

    fn close(&mut self) {
        for c in &mut self.conns {
            let _ = c.writer.shutdown(Shutdown::Both);
            if let Some(h) = c.reader.take() {
                let _ = h.join();
            }
        }
    }
}

fn check_round(role: Role, expected: u64, got: u64) -> Step<()> {
    if expected == got {
        Ok(())
    } else {
        Err(format!("{role} sent round_index {got} during round {expected}"))
    }
}

fn read_lines(idx: usize, stream: TcpStream, tx: Sender<Event>) {
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    loop {
        line.clear();
        match reader.read_line(&mut line) {
            Ok(0) => {
                let _ = tx.send(Event::Closed(idx, None));
                return;
            }
            Ok(_) => {
                let text = line.trim_end_matches(['\n', '\r']).to_string();
                if text.trim().is_empty() {
                    continue;
                }
                if tx.send(Event::Line(idx, text)).is_err() {
                    return;
                }
            }
            Err(e) => {
                let _ = tx.send(Event::Closed(idx, Some(e)));
                return;
            }
        }
    }
}
