//! Per-round responders.
//!
//! A strategy sees its own input and the round's shared resource, nothing
//! else. Shared randomness and entanglement are both reached through
//! [`RoundResource`] so the same strategy runs in-process and behind the
//! network referee.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::games::coloring::Coloring;
use crate::games::entangle::{EntangledRound, LocalOperation};
use crate::games::{DjGame, Role, MAX_DJ_M};
use crate::rng::RandomSource;

/// What a player can draw on during one round.
pub trait RoundResource {
    /// This round's shared random bit `λᵢ`.
    fn shared_bit(&mut self) -> Result<u8>;
    /// Apply `op` to the player's half of this round's entangled state and measure it.
    fn measure(&mut self, op: LocalOperation) -> Result<BitString>;
}

/// A round with no shared resource.
pub struct NoResource;

impl RoundResource for NoResource {
    fn shared_bit(&mut self) -> Result<u8> {
        Err(Error::Protocol("no shared randomness in this round".into()))
    }
    fn measure(&mut self, _: LocalOperation) -> Result<BitString> {
        Err(Error::Protocol("no entangled state in this round".into()))
    }
}

pub trait Strategy: Send {
    fn id(&self) -> String;
    fn respond(
        &mut self,
        round: u64,
        input: &BitString,
        resource: &mut dyn RoundResource,
    ) -> Result<BitString>;
}

/// A bit string `λ` fixed before the first round; both players read `λᵢ` in round `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedRandomness {
    bits: Vec<u8>,
}

impl SharedRandomness {
    pub fn generate(seed: u64, rounds: usize) -> Self {
        let mut rng = RandomSource::new(seed);
        SharedRandomness {
            bits: (0..rounds).map(|_| rng.next_bit()).collect(),
        }
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        SharedRandomness { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, round: u64) -> Result<u8> {
        self.bits
            .get(round as usize)
            .copied()
            .ok_or_else(|| Error::Protocol(format!("no shared bit for round {round}")))
    }
}

fn expect_len(input: &BitString, len: usize) -> Result<()> {
    if input.len() != len {
        return Err(Error::domain(format!(
            "input has {} bits, expected {len}",
            input.len()
        )));
    }
    Ok(())
}

/// `x₀ ⊕ x₁`.
pub fn parity_strategy_m1(x: &BitString) -> Result<u8> {
    expect_len(x, 2)?;
    Ok(x.bit(0) ^ x.bit(1))
}

/// `λᵢ ⊕ x₀ ⊕ x₁`.
pub fn shared_random_strategy_m1(x: &BitString, lambda: u8) -> Result<u8> {
    Ok(parity_strategy_m1(x)? ^ (lambda & 1))
}

/// Both halves of the entangled Deutsch-Jozsa strategy for one round,
/// sampled jointly (promise not checked).
pub fn quantum_dj_strategy(
    m: usize,
    x: &BitString,
    y: &BitString,
    rng: &mut RandomSource,
) -> Result<(BitString, BitString)> {
    if m == 0 || m > MAX_DJ_M {
        return Err(Error::domain(format!("m = {m} outside 1..={MAX_DJ_M}")));
    }
    expect_len(x, 1 << m)?;
    expect_len(y, 1 << m)?;
    let mut round = EntangledRound::new(m)?;
    let a = round.measure(Role::Alice, &LocalOperation::PhaseHadamard { bits: x.clone() }, rng)?;
    let b = round.measure(Role::Bob, &LocalOperation::PhaseHadamard { bits: y.clone() }, rng)?;
    Ok((a, b))
}

/// The colour of `x`, written in `m` bits.
pub fn coloring_strategy(c: &Coloring, x: &BitString) -> Result<BitString> {
    expect_len(x, c.n())?;
    Ok(BitString::from_index(c.color(x.to_index()) as usize, c.n().trailing_zeros() as usize))
}

pub struct ParityStrategy;

impl Strategy for ParityStrategy {
    fn id(&self) -> String {
        "parity".into()
    }
    fn respond(&mut self, _: u64, input: &BitString, _: &mut dyn RoundResource) -> Result<BitString> {
        BitString::from_bits(&[parity_strategy_m1(input)?])
    }
}

pub struct SharedRandomStrategy;

impl Strategy for SharedRandomStrategy {
    fn id(&self) -> String {
        "shared-random".into()
    }
    fn respond(&mut self, _: u64, input: &BitString, res: &mut dyn RoundResource) -> Result<BitString> {
        let lambda = res.shared_bit()?;
        BitString::from_bits(&[shared_random_strategy_m1(input, lambda)?])
    }
}

/// Both players answer with the colour of their input under the same map.
pub struct ColoringStrategy {
    coloring: Coloring,
}

impl ColoringStrategy {
    /// Rejects colourings that give two promise-distant strings the same colour.
    pub fn new(coloring: Coloring) -> Result<Self> {
        if let Some((u, v)) = coloring.conflict() {
            return Err(Error::domain(format!(
                "improper colouring: {} and {} share colour {}",
                BitString::from_index(u, coloring.n()),
                BitString::from_index(v, coloring.n()),
                coloring.color(u)
            )));
        }
        Ok(ColoringStrategy { coloring })
    }
}

impl Strategy for ColoringStrategy {
    fn id(&self) -> String {
        "coloring".into()
    }
    fn respond(&mut self, _: u64, input: &BitString, _: &mut dyn RoundResource) -> Result<BitString> {
        coloring_strategy(&self.coloring, input)
    }
}

/// Phase by the input, Hadamard every qubit, measure.
pub struct QuantumDjStrategy {
    game: DjGame,
}

impl QuantumDjStrategy {
    pub fn new(m: usize) -> Result<Self> {
        Ok(QuantumDjStrategy { game: DjGame::new(m)? })
    }
}

impl Strategy for QuantumDjStrategy {
    fn id(&self) -> String {
        "quantum".into()
    }
    fn respond(&mut self, _: u64, input: &BitString, res: &mut dyn RoundResource) -> Result<BitString> {
        expect_len(input, self.game.n())?;
        res.measure(LocalOperation::PhaseHadamard { bits: input.clone() })
    }
}

/// Always answers zeros. Loses the first round with `x ≠ y`.
pub struct ConstantStrategy {
    pub output_len: usize,
}

impl Strategy for ConstantStrategy {
    fn id(&self) -> String {
        "constant".into()
    }
    fn respond(&mut self, _: u64, _: &BitString, _: &mut dyn RoundResource) -> Result<BitString> {
        Ok(BitString::zeros(self.output_len))
    }
}

/// Measurement angles for the two CHSH settings of each player.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChshAngles {
    pub alice: [f64; 2],
    pub bob: [f64; 2],
}

impl Default for ChshAngles {
    /// Alice `0, π/4`; Bob `π/8, -π/8`. These reach `2√2`.
    fn default() -> Self {
        ChshAngles {
            alice: [0.0, FRAC_PI_4],
            bob: [FRAC_PI_8, -FRAC_PI_8],
        }
    }
}

impl ChshAngles {
    pub fn for_role(&self, role: Role) -> [f64; 2] {
        match role {
            Role::Alice => self.alice,
            Role::Bob => self.bob,
        }
    }
}

/// Measures along `angles[x]`.
pub struct ChshQuantumStrategy {
    angles: [f64; 2],
}

impl ChshQuantumStrategy {
    pub fn new(role: Role, angles: &ChshAngles) -> Self {
        ChshQuantumStrategy {
            angles: angles.for_role(role),
        }
    }
}

impl Strategy for ChshQuantumStrategy {
    fn id(&self) -> String {
        "chsh-quantum".into()
    }
    fn respond(&mut self, _: u64, input: &BitString, res: &mut dyn RoundResource) -> Result<BitString> {
        expect_len(input, 1)?;
        res.measure(LocalOperation::Rotate {
            angle: self.angles[input.bit(0) as usize],
        })
    }
}

/// A fixed function of the input bit, `table[x]`.
pub struct ChshDeterministicStrategy {
    pub table: [u8; 2],
}

impl Strategy for ChshDeterministicStrategy {
    fn id(&self) -> String {
        format!("chsh-deterministic-{}{}", self.table[0], self.table[1])
    }
    fn respond(&mut self, _: u64, input: &BitString, _: &mut dyn RoundResource) -> Result<BitString> {
        expect_len(input, 1)?;
        BitString::from_bits(&[self.table[input.bit(0) as usize]])
    }
}
