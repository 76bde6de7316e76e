//! CHSH correlation `S = E(0,0) + E(0,1) + E(1,0) − E(1,1)`, where `E(x,y)`
//! is the expectation of the ±1-valued product of the two outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::entangle::{apply_local, maximally_entangled, EntangledRound, LocalOperation};
use crate::games::strategy::ChshAngles;
use crate::games::Role;
use crate::qsim::qubits;
use crate::rng::RandomSource;

/// The four deterministic maps from one input bit to one output bit:
/// index `t` outputs bit `x` of `t` (`t = 0b10` is the identity map).
fn deterministic_output(t: usize, x: usize) -> i32 {
    ((t >> x) & 1) as i32
}

fn sign(a: i32, b: i32) -> i32 {
    if a == b {
        1
    } else {
        -1
    }
}

/// `S` for Alice using deterministic map `ta` and Bob `tb`.
pub fn chsh_deterministic_value(ta: usize, tb: usize) -> i32 {
    let e = |x, y| sign(deterministic_output(ta, x), deterministic_output(tb, y));
    e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1)
}

/// `S` for all 16 deterministic strategy pairs, `ta·4 + tb` order.
pub fn chsh_classical_values() -> Vec<i32> {
    (0..4)
        .flat_map(|ta| (0..4).map(move |tb| chsh_deterministic_value(ta, tb)))
        .collect()
}

/// Largest `S` over deterministic local strategies (shared randomness only
/// mixes these, so it cannot do better).
pub fn chsh_classical_max() -> i32 {
    chsh_classical_values().into_iter().max().unwrap_or(0)
}

pub fn chsh_classical_min() -> i32 {
    chsh_classical_values().into_iter().min().unwrap_or(0)
}

/// Exact `E(α, β)` on `(|00⟩+|11⟩)/√2` with each qubit measured along its angle.
pub fn correlation(alpha: f64, beta: f64) -> Result<f64> {
    let s = maximally_entangled(1)?;
    let s = apply_local(&s, 1, Role::Alice, &LocalOperation::Rotate { angle: alpha })?;
    let s = apply_local(&s, 1, Role::Bob, &LocalOperation::Rotate { angle: beta })?;
    let p = s.register_probabilities(&qubits(0..2))?;
    Ok(p[0] + p[3] - p[1] - p[2])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChshMode {
    Analytic,
    Sample,
}

/// Per-setting correlations and their combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    /// `E(x, y)` in order (0,0), (0,1), (1,0), (1,1).
    pub correlations: [f64; 4],
    pub s: f64,
    /// Rounds used per setting (0 in analytic mode).
    pub rounds_per_setting: [u64; 4],
}

fn combine(e: [f64; 4]) -> f64 {
    e[0] + e[1] + e[2] - e[3]
}

pub fn chsh_quantum_analytic(angles: &ChshAngles) -> Result<ChshEstimate> {
    let mut e = [0.0; 4];
    for (i, slot) in e.iter_mut().enumerate() {
        *slot = correlation(angles.alice[i >> 1], angles.bob[i & 1])?;
    }
    Ok(ChshEstimate {
        correlations: e,
        s: combine(e),
        rounds_per_setting: [0; 4],
    })
}

/// Sampled estimate. Round `i` uses setting `i mod 4`, so the four
/// settings share the rounds evenly.
pub fn chsh_quantum_sampled(
    angles: &ChshAngles,
    rounds: u64,
    rng: &mut RandomSource,
) -> Result<ChshEstimate> {
    if rounds < 4 {
        return Err(Error::domain(format!(
            "need at least 4 rounds (one per setting), got {rounds}"
        )));
    }
    let mut sums = [0i64; 4];
    let mut counts = [0u64; 4];
    for i in 0..rounds {
        let setting = (i % 4) as usize;
        let (x, y) = (setting >> 1, setting & 1);
        let mut round = EntangledRound::new(1)?;
        let a = round.measure(Role::Alice, &LocalOperation::Rotate { angle: angles.alice[x] }, rng)?;
        let b = round.measure(Role::Bob, &LocalOperation::Rotate { angle: angles.bob[y] }, rng)?;
        sums[setting] += if a == b { 1 } else { -1 };
        counts[setting] += 1;
    }
    let e = std::array::from_fn(|i| sums[i] as f64 / counts[i] as f64);
    Ok(ChshEstimate {
        correlations: e,
        s: combine(e),
        rounds_per_setting: counts,
    })
}

pub fn chsh_quantum_value(
    angles: &ChshAngles,
    mode: ChshMode,
    rounds: u64,
    rng: &mut RandomSource,
) -> Result<ChshEstimate> {
    match mode {
        ChshMode::Analytic => chsh_quantum_analytic(angles),
        ChshMode::Sample => chsh_quantum_sampled(angles, rounds, rng),
    }
}
