//! JSON-lines session logs: a header line, one line per round, then a
//! summary line. Logs are flushed after every line so an aborted session
//! leaves a readable partial log.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use telepathy_core::games::RoundRecord;
use telepathy_core::RandomSource;

use crate::config::SessionConfig;
use crate::error::{RefereeError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub protocol_version: String,
    pub rng_algorithm: String,
    pub config: SessionConfig,
    pub started_unix_ms: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogSummary {
    pub rounds: u64,
    pub wins: u64,
    pub losses: u64,
    pub promise_violations: u64,
    pub protocol_errors: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

impl LogSummary {
    pub fn from_records(records: &[RoundRecord], aborted: Option<String>) -> Self {
        let mut s = LogSummary {
            aborted,
            ..LogSummary::default()
        };
        for r in records {
            s.rounds += 1;
            if r.won {
                s.wins += 1;
            } else {
                s.losses += 1;
            }
            s.promise_violations += u64::from(!r.promise_held);
            s.protocol_errors += u64::from(r.protocol_error);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogLine {
    Header(LogHeader),
    Round(RoundRecord),
    Summary(LogSummary),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionLog {
    pub header: LogHeader,
    pub records: Vec<RoundRecord>,
    /// Missing only if the referee died before finishing the log.
    pub summary: Option<LogSummary>,
}

impl SessionLog {
    pub fn lines(&self) -> Vec<LogLine> {
        let mut out = vec![LogLine::Header(self.header.clone())];
        out.extend(self.records.iter().cloned().map(LogLine::Round));
        out.extend(self.summary.clone().map(LogLine::Summary));
        out
    }

    pub fn to_jsonl(&self) -> String {
        self.lines().iter().map(line_text).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = None;
        let mut records = Vec::new();
        let mut summary = None;
        for (no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parsed: LogLine = serde_json::from_str(line)
                .map_err(|e| RefereeError::Malformed(format!("log line {}: {e}", no + 1)))?;
            match parsed {
                LogLine::Header(h) if header.is_none() && no == 0 => header = Some(h),
                LogLine::Round(r) if header.is_some() && summary.is_none() => records.push(r),
                LogLine::Summary(s) if header.is_some() && summary.is_none() => summary = Some(s),
                _ => {
                    return Err(RefereeError::Malformed(format!(
                        "log line {} is out of order",
                        no + 1
                    )))
                }
            }
        }
        let header = header.ok_or_else(|| RefereeError::Malformed("log has no header".into()))?;
        Ok(SessionLog {
            header,
            records,
            summary,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Regenerates the inputs from the logged seed and re-adjudicates every
    /// round against the logged outputs.
    pub fn verify_replay(&self) -> Result<()> {
        let cfg = &self.header.config;
        let mut sampler = cfg.sampler()?;
        let mut rng = RandomSource::new(cfg.seed);
        for (i, r) in self.records.iter().enumerate() {
            let i = i as u64;
            let mismatch = |reason: String| RefereeError::ReplayMismatch { round: i, reason };
            if r.round_index != i {
                return Err(mismatch(format!("logged index {}", r.round_index)));
            }
            let (x, y) = sampler.sample(&mut rng)?;
            if x != r.x || y != r.y {
                return Err(mismatch(format!(
                    "inputs ({}, {}) regenerate as ({x}, {y})",
                    r.x, r.y
                )));
            }
            let again = RoundRecord::adjudicate(
                &cfg.game,
                i,
                x,
                y,
                r.a.clone(),
                r.b.clone(),
                r.strategy_id.clone(),
                cfg.seed,
            );
            if again.won != r.won
                || again.promise_held != r.promise_held
                || again.protocol_error != r.protocol_error
            {
                return Err(mismatch("verdict differs on re-adjudication".into()));
            }
        }
        if let Some(s) = &self.summary {
            let expect = LogSummary::from_records(&self.records, s.aborted.clone());
            if &expect != s {
                return Err(RefereeError::ReplayMismatch {
                    round: self.records.len() as u64,
                    reason: "summary does not match the rounds".into(),
                });
            }
        }
        Ok(())
    }
}

fn line_text(line: &LogLine) -> String {
    let mut s = serde_json::to_string(line).expect("log lines always serialize");
    s.push('\n');
    s
}

/// Appends log lines to a file, flushing each one.
pub struct LogWriter {
    out: BufWriter<File>,
}

impl LogWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(LogWriter {
            out: BufWriter::new(File::create(path)?),
        })
    }

    pub fn write(&mut self, line: &LogLine) -> Result<()> {
        self.out.write_all(line_text(line).as_bytes())?;
        self.out.flush()?;
        Ok(())
    }
}
