//! Running rounds of a game between two strategies in one process.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::games::entangle::{EntangledRound, LocalOperation};
use crate::games::strategy::{RoundResource, SharedRandomness, Strategy};
use crate::games::{GameKind, GameSpec, Role};
use crate::rng::RandomSource;

/// Stream id used for measurement randomness, next to the input stream 0.
pub const MEASUREMENT_STREAM: u64 = 1;

/// One adjudicated round; also the unit of the JSON-lines logs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_index: u64,
    pub x: BitString,
    pub y: BitString,
    pub a: BitString,
    pub b: BitString,
    pub promise_held: bool,
    pub won: bool,
    /// Set when an output had the wrong length; such rounds count as losses.
    #[serde(default)]
    pub protocol_error: bool,
    pub strategy_id: String,
    pub seed: u64,
}

impl RoundRecord {
    /// Builds and adjudicates a record. Outputs of the wrong length make the
    /// round a protocol-error loss.
    #[allow(clippy::too_many_arguments)]
    pub fn adjudicate(
        game: &dyn GameSpec,
        round_index: u64,
        x: BitString,
        y: BitString,
        a: BitString,
        b: BitString,
        strategy_id: String,
        seed: u64,
    ) -> RoundRecord {
        let protocol_error =
            a.len() != game.output_len(Role::Alice) || b.len() != game.output_len(Role::Bob);
        let promise_held = game.promise(&x, &y);
        let won = !protocol_error && game.adjudicate(&x, &y, &a, &b);
        RoundRecord {
            round_index,
            x,
            y,
            a,
            b,
            promise_held,
            won,
            protocol_error,
            strategy_id,
            seed,
        }
    }
}

/// Produces each round's input pair.
pub trait InputSampler: Send {
    fn sample(&mut self, rng: &mut RandomSource) -> Result<(BitString, BitString)>;
}

/// Deutsch-Jozsa inputs: `x` uniform; `y = x` with probability
/// `equal_probability`, otherwise `y` is `x` with a uniformly chosen half of
/// its positions flipped.
#[derive(Clone, Debug)]
pub struct PromiseSampler {
    n: usize,
    equal_probability: f64,
}

impl PromiseSampler {
    pub fn new(m: usize, equal_probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&equal_probability) {
            return Err(Error::domain("equal_probability must lie in [0, 1]"));
        }
        crate::games::DjGame::new(m)?;
        Ok(PromiseSampler {
            n: 1 << m,
            equal_probability,
        })
    }
}

impl InputSampler for PromiseSampler {
    fn sample(&mut self, rng: &mut RandomSource) -> Result<(BitString, BitString)> {
        let xi = rng.below(1 << self.n) as usize;
        let x = BitString::from_index(xi, self.n);
        if rng.next_f64() < self.equal_probability {
            return Ok((x.clone(), x));
        }
        let mut positions: Vec<usize> = (0..self.n).collect();
        rng.shuffle(&mut positions);
        let mask = positions[..self.n / 2]
            .iter()
            .fold(0usize, |acc, &p| acc | (1 << (self.n - 1 - p)));
        Ok((x, BitString::from_index(xi ^ mask, self.n)))
    }
}

/// Independent uniform strings; may break the promise.
#[derive(Clone, Debug)]
pub struct UniformSampler {
    pub n: usize,
}

impl InputSampler for UniformSampler {
    fn sample(&mut self, rng: &mut RandomSource) -> Result<(BitString, BitString)> {
        let x = BitString::from_index(rng.below(1 << self.n) as usize, self.n);
        let y = BitString::from_index(rng.below(1 << self.n) as usize, self.n);
        Ok((x, y))
    }
}

/// Replays a fixed list of pairs.
#[derive(Clone, Debug)]
pub struct ScriptedSampler {
    pairs: Vec<(BitString, BitString)>,
    next: usize,
}

impl ScriptedSampler {
    pub fn new(pairs: Vec<(BitString, BitString)>) -> Self {
        ScriptedSampler { pairs, next: 0 }
    }
}

impl InputSampler for ScriptedSampler {
    fn sample(&mut self, _: &mut RandomSource) -> Result<(BitString, BitString)> {
        let pair = self
            .pairs
            .get(self.next)
            .cloned()
            .ok_or_else(|| Error::domain("scripted inputs exhausted"))?;
        self.next += 1;
        Ok(pair)
    }
}

/// The default sampler for a game: [`PromiseSampler`] for Deutsch-Jozsa,
/// uniform bits for CHSH.
pub fn default_sampler(game: &GameKind, equal_probability: f64) -> Result<Box<dyn InputSampler>> {
    Ok(match game {
        GameKind::Dj { m } => Box::new(PromiseSampler::new(*m, equal_probability)?),
        GameKind::Chsh => Box::new(UniformSampler { n: 1 }),
    })
}

#[derive(Clone, Debug, Default)]
pub enum Resource {
    #[default]
    None,
    SharedRandomness(SharedRandomness),
    /// A fresh copy of `|Ψ⟩` with this many qubits per player, every round.
    Entanglement { qubits_per_player: usize },
}

struct LocalResource<'a> {
    round_index: u64,
    shared: Option<&'a SharedRandomness>,
    entangled: Option<&'a mut EntangledRound>,
    role: Role,
    rng: &'a mut RandomSource,
}

impl RoundResource for LocalResource<'_> {
    fn shared_bit(&mut self) -> Result<u8> {
        self.shared
            .ok_or_else(|| Error::Protocol("no shared randomness in this game".into()))?
            .bit(self.round_index)
    }

    fn measure(&mut self, op: LocalOperation) -> Result<BitString> {
        self.entangled
            .as_deref_mut()
            .ok_or_else(|| Error::Protocol("no entangled state in this game".into()))?
            .measure(self.role, &op, self.rng)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayStats {
    pub rounds: u64,
    pub wins: u64,
    pub losses: u64,
    pub promise_violations: u64,
    pub protocol_errors: u64,
    /// The first lost round. One loss is enough to show there is no winning strategy.
    pub first_loss: Option<u64>,
    /// Alice's output counts by value (well-formed outputs only).
    pub alice_outputs: Vec<u64>,
    pub bob_outputs: Vec<u64>,
}

impl PlayStats {
    pub fn from_records(records: &[RoundRecord], output_len: usize) -> PlayStats {
        let mut st = PlayStats {
            alice_outputs: vec![0; 1 << output_len],
            bob_outputs: vec![0; 1 << output_len],
            ..PlayStats::default()
        };
        for r in records {
            st.rounds += 1;
            if r.won {
                st.wins += 1;
            } else {
                st.losses += 1;
                st.first_loss = Some(st.first_loss.map_or(r.round_index, |f| f.min(r.round_index)));
            }
            st.promise_violations += u64::from(!r.promise_held);
            st.protocol_errors += u64::from(r.protocol_error);
            if r.a.len() == output_len {
                st.alice_outputs[r.a.to_index()] += 1;
            }
            if r.b.len() == output_len {
                st.bob_outputs[r.b.to_index()] += 1;
            }
        }
        st
    }

    pub fn loss_observed(&self) -> bool {
        self.losses > 0
    }

    pub fn win_rate(&self) -> f64 {
        if self.rounds == 0 {
            0.0
        } else {
            self.wins as f64 / self.rounds as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlayReport {
    pub stats: PlayStats,
    pub records: Vec<RoundRecord>,
}

/// Plays `rounds` rounds. Inputs come from `sampler` driven by `rng`;
/// measurements use stream [`MEASUREMENT_STREAM`] of the same seed. Alice
/// responds before Bob in each round.
#[allow(clippy::too_many_arguments)]
pub fn play_rounds(
    game: &dyn GameSpec,
    alice: &mut dyn Strategy,
    bob: &mut dyn Strategy,
    resource: &Resource,
    rounds: u64,
    rng: &mut RandomSource,
    sampler: &mut dyn InputSampler,
) -> Result<PlayReport> {
    let seed = rng.seed();
    let mut measure_rng = RandomSource::with_stream(seed, MEASUREMENT_STREAM);
    let strategy_id = format!("{}/{}", alice.id(), bob.id());
    let mut records = Vec::with_capacity(rounds as usize);
    for i in 0..rounds {
        let (x, y) = sampler.sample(rng)?;
        let (shared, mut entangled) = match resource {
            Resource::None => (None, None),
            Resource::SharedRandomness(l) => (Some(l), None),
            Resource::Entanglement { qubits_per_player } => {
                (None, Some(EntangledRound::new(*qubits_per_player)?))
            }
        };
        let a = alice.respond(
            i,
            &x,
            &mut LocalResource {
                round_index: i,
                shared,
                entangled: entangled.as_mut(),
                role: Role::Alice,
                rng: &mut measure_rng,
            },
        )?;
        let b = bob.respond(
            i,
            &y,
            &mut LocalResource {
                round_index: i,
                shared,
                entangled: entangled.as_mut(),
                role: Role::Bob,
                rng: &mut measure_rng,
            },
        )?;
        records.push(RoundRecord::adjudicate(
            game,
            i,
            x,
            y,
            a,
            b,
            strategy_id.clone(),
            seed,
        ));
    }
    Ok(PlayReport {
        stats: PlayStats::from_records(&records, game.output_len(Role::Alice)),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::strategy::{ConstantStrategy, ParityStrategy, QuantumDjStrategy};
    use crate::games::{dj_promise, DjGame};

    #[test]
    fn promise_sampler_respects_promise() {
        let mut s = PromiseSampler::new(2, 0.5).unwrap();
        let mut rng = RandomSource::new(4);
        let mut equal = 0;
        for _ in 0..4000 {
            let (x, y) = s.sample(&mut rng).unwrap();
            assert!(dj_promise(&x, &y).unwrap());
            equal += u32::from(x == y);
        }
        assert!((equal as f64 / 4000.0 - 0.5).abs() < 0.04);
        assert!(PromiseSampler::new(2, 1.5).is_err());
    }

    #[test]
    fn quantum_m1_no_losses() {
        let game = DjGame::new(1).unwrap();
        let mut rng = RandomSource::new(12);
        let mut sampler = PromiseSampler::new(1, 0.5).unwrap();
        let rep = play_rounds(
            &game,
            &mut QuantumDjStrategy::new(1).unwrap(),
            &mut QuantumDjStrategy::new(1).unwrap(),
            &Resource::Entanglement { qubits_per_player: 1 },
            1000,
            &mut rng,
            &mut sampler,
        )
        .unwrap();
        assert_eq!(rep.stats.losses, 0);
        assert_eq!(rep.stats.wins, 1000);
        assert!(!rep.stats.loss_observed());
    }

    #[test]
    fn constant_players_lose() {
        let game = DjGame::new(1).unwrap();
        let mut rng = RandomSource::new(13);
        let mut sampler = PromiseSampler::new(1, 0.5).unwrap();
        let rep = play_rounds(
            &game,
            &mut ConstantStrategy { output_len: 1 },
            &mut ConstantStrategy { output_len: 1 },
            &Resource::None,
            100,
            &mut rng,
            &mut sampler,
        )
        .unwrap();
        assert!(rep.stats.loss_observed());
        assert!(rep.stats.first_loss.is_some());
    }

    #[test]
    fn zero_rounds() {
        let game = DjGame::new(1).unwrap();
        let mut rng = RandomSource::new(0);
        let mut sampler = PromiseSampler::new(1, 0.5).unwrap();
        let rep = play_rounds(
            &game,
            &mut ParityStrategy,
            &mut ParityStrategy,
            &Resource::None,
            0,
            &mut rng,
            &mut sampler,
        )
        .unwrap();
        assert!(rep.records.is_empty());
        assert_eq!(rep.stats.rounds, 0);
    }

    #[test]
    fn wrong_length_is_protocol_error_loss() {
        let game = DjGame::new(2).unwrap();
        let mut rng = RandomSource::new(0);
        let mut sampler = PromiseSampler::new(2, 0.5).unwrap();
        let rep = play_rounds(
            &game,
            &mut ConstantStrategy { output_len: 3 },
            &mut ConstantStrategy { output_len: 2 },
            &Resource::None,
            5,
            &mut rng,
            &mut sampler,
        )
        .unwrap();
        assert_eq!(rep.stats.protocol_errors, 5);
        assert_eq!(rep.stats.losses, 5);
    }

    #[test]
    fn missing_resource_is_error() {
        let game = DjGame::new(1).unwrap();
        let mut rng = RandomSource::new(0);
        let mut sampler = PromiseSampler::new(1, 0.5).unwrap();
        let r = play_rounds(
            &game,
            &mut QuantumDjStrategy::new(1).unwrap(),
            &mut QuantumDjStrategy::new(1).unwrap(),
            &Resource::None,
            1,
            &mut rng,
            &mut sampler,
        );
        assert!(matches!(r, Err(Error::Protocol(_))));
    }

    #[test]
    fn record_json_shape() {
        let game = DjGame::new(1).unwrap();
        let r = RoundRecord::adjudicate(
            &game,
            3,
            "00".parse().unwrap(),
            "01".parse().unwrap(),
            "0".parse().unwrap(),
            "1".parse().unwrap(),
            "parity/parity".into(),
            7,
        );
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"round_index":3,"x":"00","y":"01","a":"0","b":"1","promise_held":true,"won":true,"protocol_error":false,"strategy_id":"parity/parity","seed":7}"#
        );
    }
}
