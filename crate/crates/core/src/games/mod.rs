//! Two-party games `⟨X, Y, A, B, P, W⟩`: input sets, output sets, a promise
//! on the inputs and a winning relation. A round whose inputs break the
//! promise is won whatever the players answer.

pub mod chsh;
pub mod coloring;
pub mod entangle;
pub mod play;
pub mod strategy;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

pub use entangle::{EntangledRound, LocalOperation};
pub use play::{play_rounds, PlayReport, PlayStats, Resource, RoundRecord};
pub use strategy::{RoundResource, Strategy};

/// Largest Deutsch-Jozsa game parameter; `m = 4` needs 8 simulated qubits.
pub const MAX_DJ_M: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Alice => Role::Bob,
            Role::Bob => Role::Alice,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alice" => Ok(Role::Alice),
            "bob" => Ok(Role::Bob),
            other => Err(Error::domain(format!("unknown role {other:?}"))),
        }
    }
}

pub trait GameSpec {
    fn name(&self) -> String;
    fn input_len(&self, role: Role) -> usize;
    fn output_len(&self, role: Role) -> usize;
    fn promise(&self, x: &BitString, y: &BitString) -> bool;
    fn winning(&self, x: &BitString, y: &BitString, a: &BitString, b: &BitString) -> bool;

    /// Won iff the promise fails or the winning relation holds.
    fn adjudicate(&self, x: &BitString, y: &BitString, a: &BitString, b: &BitString) -> bool {
        !self.promise(x, y) || self.winning(x, y, a, b)
    }
}

/// Deutsch-Jozsa game: inputs of `n = 2^m` bits, outputs of `m` bits, promise
/// that the inputs are equal or differ in exactly `n/2` places, and the
/// players win iff `a = b ⇔ x = y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DjGame {
    pub m: usize,
}

impl DjGame {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_DJ_M {
            return Err(Error::domain(format!("m = {m} outside 1..={MAX_DJ_M}")));
        }
        Ok(DjGame { m })
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    /// Every ordered input pair that satisfies the promise.
    pub fn promise_pairs(&self) -> Vec<(BitString, BitString)> {
        let n = self.n();
        let masks: Vec<usize> = (0..1usize << n)
            .filter(|v| v.count_ones() as usize == n / 2)
            .collect();
        let mut out = Vec::new();
        for xi in 0..1usize << n {
            let x = BitString::from_index(xi, n);
            out.push((x.clone(), x.clone()));
            for &mask in &masks {
                out.push((x.clone(), BitString::from_index(xi ^ mask, n)));
            }
        }
        out
    }
}

/// True iff the strings are equal or differ in exactly half their positions.
pub fn dj_promise(x: &BitString, y: &BitString) -> Result<bool> {
    let n = x.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::domain(format!("input length {n} is not a power of two ≥ 2")));
    }
    let d = x.hamming(y)?;
    Ok(d == 0 || d == n / 2)
}

impl GameSpec for DjGame {
    fn name(&self) -> String {
        format!("dj(m={})", self.m)
    }
    fn input_len(&self, _: Role) -> usize {
        self.n()
    }
    fn output_len(&self, _: Role) -> usize {
        self.m
    }
    fn promise(&self, x: &BitString, y: &BitString) -> bool {
        x.len() == self.n() && dj_promise(x, y).unwrap_or(false)
    }
    fn winning(&self, x: &BitString, y: &BitString, a: &BitString, b: &BitString) -> bool {
        a.len() == self.m && b.len() == self.m && ((a == b) == (x == y))
    }
}

/// CHSH: one-bit inputs and outputs, no promise, won iff `a ⊕ b = x ∧ y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChshGame;

impl GameSpec for ChshGame {
    fn name(&self) -> String {
        "chsh".into()
    }
    fn input_len(&self, _: Role) -> usize {
        1
    }
    fn output_len(&self, _: Role) -> usize {
        1
    }
    fn promise(&self, _: &BitString, _: &BitString) -> bool {
        true
    }
    fn winning(&self, x: &BitString, y: &BitString, a: &BitString, b: &BitString) -> bool {
        [x, y, a, b].iter().all(|s| s.len() == 1)
            && (a.bit(0) ^ b.bit(0)) == (x.bit(0) & y.bit(0))
    }
}

/// Serializable choice of game, as carried by session configs and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GameKind {
    Dj { m: usize },
    Chsh,
}

impl GameKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            GameKind::Dj { m } => DjGame::new(*m).map(|_| ()),
            GameKind::Chsh => Ok(()),
        }
    }

    /// Qubits per player in the shared state for this game.
    pub fn qubits_per_player(&self) -> usize {
        match self {
            GameKind::Dj { m } => *m,
            GameKind::Chsh => 1,
        }
    }
}

impl GameSpec for GameKind {
    fn name(&self) -> String {
        match self {
            GameKind::Dj { m } => DjGame { m: *m }.name(),
            GameKind::Chsh => ChshGame.name(),
        }
    }
    fn input_len(&self, role: Role) -> usize {
        match self {
            GameKind::Dj { m } => DjGame { m: *m }.input_len(role),
            GameKind::Chsh => ChshGame.input_len(role),
        }
    }
    fn output_len(&self, role: Role) -> usize {
        match self {
            GameKind::Dj { m } => DjGame { m: *m }.output_len(role),
            GameKind::Chsh => ChshGame.output_len(role),
        }
    }
    fn promise(&self, x: &BitString, y: &BitString) -> bool {
        match self {
            GameKind::Dj { m } => DjGame { m: *m }.promise(x, y),
            GameKind::Chsh => ChshGame.promise(x, y),
        }
    }
    fn winning(&self, x: &BitString, y: &BitString, a: &BitString, b: &BitString) -> bool {
        match self {
            GameKind::Dj { m } => DjGame { m: *m }.winning(x, y, a, b),
            GameKind::Chsh => ChshGame.winning(x, y, a, b),
        }
    }
}
