//! Shared entangled state for one round.
//!
//! Each player owns `m` qubits of `|Ψ⟩ = n^{-1/2} Σ_j |j⟩|j⟩` (Alice's
//! register first) and may apply one local operation to its own register
//! and then measure it. Measurements are applied in call order; local
//! operations on disjoint registers commute, so the joint outcome law does
//! not depend on who goes first.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::games::Role;
use crate::qsim::{measurement_rotation, qubits, QubitIndex, StateVector};
use crate::rng::RandomSource;

/// The one thing a player may do to its half of the shared state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LocalOperation {
    /// `|j⟩ → (-1)^{bits[j]}|j⟩`, then a Hadamard on every qubit.
    PhaseHadamard { bits: BitString },
    /// Measure a single qubit along `cos θ|0⟩ + sin θ|1⟩`.
    Rotate { angle: f64 },
}

/// `n^{-1/2} Σ_j |j⟩|j⟩` over two `m`-qubit registers.
pub fn maximally_entangled(m: usize) -> Result<StateVector> {
    if m == 0 {
        return Err(Error::domain("each party needs at least one qubit"));
    }
    let n = 1usize << m;
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        v[j * n + j] = 1.0;
    }
    StateVector::from_real(&v)
}

fn register(role: Role, m: usize) -> Vec<QubitIndex> {
    match role {
        Role::Alice => qubits(0..m),
        Role::Bob => qubits(m..2 * m),
    }
}

/// Applies `op` to `role`'s register, without measuring.
pub fn apply_local(
    state: &StateVector,
    m: usize,
    role: Role,
    op: &LocalOperation,
) -> Result<StateVector> {
    let reg = register(role, m);
    match op {
        LocalOperation::PhaseHadamard { bits } => {
            if bits.len() != 1 << m {
                return Err(Error::domain(format!(
                    "phase string has {} bits, register needs {}",
                    bits.len(),
                    1usize << m
                )));
            }
            state
                .apply_phase_by_bits(bits.bits(), &reg)?
                .apply_hadamard_each(&reg)
        }
        LocalOperation::Rotate { angle } => {
            if m != 1 {
                return Err(Error::domain("rotated measurements need one qubit per player"));
            }
            if !angle.is_finite() {
                return Err(Error::domain("angle must be finite"));
            }
            state.apply_single_qubit(reg[0], &measurement_rotation(*angle))
        }
    }
}

#[derive(Clone, Debug)]
pub struct EntangledRound {
    m: usize,
    state: StateVector,
    used: [bool; 2],
}

impl EntangledRound {
    pub fn new(m: usize) -> Result<Self> {
        Ok(EntangledRound {
            m,
            state: maximally_entangled(m)?,
            used: [false; 2],
        })
    }

    pub fn qubits_per_player(&self) -> usize {
        self.m
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn is_used(&self, role: Role) -> bool {
        self.used[role as usize]
    }

    /// Applies `op` to the player's register and measures it. Each player
    /// may do this once per round.
    pub fn measure(
        &mut self,
        role: Role,
        op: &LocalOperation,
        rng: &mut RandomSource,
    ) -> Result<BitString> {
        if self.used[role as usize] {
            return Err(Error::Protocol(format!(
                "{role} already measured its half of this round's state"
            )));
        }
        let reg = register(role, self.m);
        let rotated = apply_local(&self.state, self.m, role, op)?;
        let (outcome, post) = rotated.measure(&reg, rng)?;
        self.state = post;
        self.used[role as usize] = true;
        Ok(BitString::from_index(outcome, self.m))
    }
}

/// Exact joint law of `(a, b)` for the Deutsch-Jozsa quantum strategy,
/// indexed `a·2^m + b`, computed from the full post-circuit state.
pub fn quantum_dj_joint_distribution(m: usize, x: &BitString, y: &BitString) -> Result<Vec<f64>> {
    let s = maximally_entangled(m)?;
    let s = apply_local(&s, m, Role::Alice, &LocalOperation::PhaseHadamard { bits: x.clone() })?;
    let s = apply_local(&s, m, Role::Bob, &LocalOperation::PhaseHadamard { bits: y.clone() })?;
    s.register_probabilities(&qubits(0..2 * m))
}
