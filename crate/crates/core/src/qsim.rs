//! Dense state-vector simulation for small registers.
//!
//! Basis index convention: qubit 0 is the most significant bit, so the
//! amplitude of `|x₀x₁…x_{k-1}⟩` sits at index `Σ xᵢ·2^{k-1-i}` and a
//! printed ket reads left to right in qubit order.
//!
//! States are values: every gate returns a new [`StateVector`].

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracles::BooleanOracle;
use crate::rng::RandomSource;

pub type Amplitude = Complex64;

/// Tolerance for invariant checks (normalization, orthonormality).
pub const NORM_TOL: f64 = 1e-9;

/// Largest register the simulator admits.
pub const MAX_QUBITS: usize = 10;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Position of a qubit inside a register; checked against each state it is used with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitIndex(pub usize);

impl From<usize> for QubitIndex {
    fn from(i: usize) -> Self {
        QubitIndex(i)
    }
}

/// Shorthand for building a list of qubit indices.
pub fn qubits(range: impl IntoIterator<Item = usize>) -> Vec<QubitIndex> {
    range.into_iter().map(QubitIndex).collect()
}

/// A 2×2 matrix acting on one qubit, row-major.
pub type Gate1 = [[Complex64; 2]; 2];

pub fn hadamard_gate() -> Gate1 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// Real rotation taking `cos θ|0⟩ + sin θ|1⟩` to `|0⟩`; measuring afterwards
/// in the computational basis is a measurement along angle `θ`.
pub fn measurement_rotation(theta: f64) -> Gate1 {
    let (s, c) = theta.sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// `|index⟩` on `k` qubits.
    pub fn basis(k: usize, index: usize) -> Result<Self> {
        check_qubit_count(k)?;
        let dim = 1usize << k;
        if index >= dim {
            return Err(Error::domain(format!(
                "basis index {index} out of range for {k} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits: k, amps })
    }

    /// Admits an amplitude vector that is already normalized.
    pub fn from_amplitudes(amps: Vec<Amplitude>) -> Result<Self> {
        let k = qubits_for_len(amps.len())?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::domain("non-finite amplitude"));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("state not normalized (|ψ|² = {norm})")));
        }
        Ok(StateVector { num_qubits: k, amps })
    }

    /// Scales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amps: Vec<Amplitude>) -> Result<Self> {
        qubits_for_len(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::domain("cannot normalize a zero or non-finite vector"));
        }
        Self::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
    }

    /// Real-amplitude convenience constructor (normalizes).
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::normalized(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// `Σ cᵢ|ψᵢ⟩`, which must come out normalized.
    pub fn linear_combination(terms: &[(Amplitude, &StateVector)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::domain("empty linear combination"))?;
        let dim = first.1.dim();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (c, s) in terms {
            if s.dim() != dim {
                return Err(Error::domain("dimension mismatch in linear combination"));
            }
            for (acc, a) in amps.iter_mut().zip(&s.amps) {
                *acc += c * a;
            }
        }
        Self::from_amplitudes(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Amplitude {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ other`; `self`'s qubits come first.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        check_qubit_count(self.num_qubits + other.num_qubits)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amps,
        })
    }

    fn mask(&self, q: QubitIndex) -> Result<usize> {
        if q.0 >= self.num_qubits {
            return Err(Error::domain(format!(
                "qubit {} out of range for {} qubits",
                q.0, self.num_qubits
            )));
        }
        Ok(1 << (self.num_qubits - 1 - q.0))
    }

    /// Bit masks for a register, validated as in range and distinct.
    fn register_masks(&self, register: &[QubitIndex]) -> Result<Vec<usize>> {
        let masks = register
            .iter()
            .map(|&q| self.mask(q))
            .collect::<Result<Vec<_>>>()?;
        let union = masks.iter().fold(0usize, |acc, m| acc | m);
        if union.count_ones() as usize != masks.len() {
            return Err(Error::domain("register lists a qubit twice"));
        }
        Ok(masks)
    }

    /// Applies a single-qubit gate. The gate must be unitary.
    pub fn apply_single_qubit(&self, q: QubitIndex, gate: &Gate1) -> Result<StateVector> {
        check_unitary(gate)?;
        let mask = self.mask(q)?;
        let mut amps = self.amps.clone();
        for i in 0..self.dim() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            let (a0, a1) = (self.amps[i], self.amps[j]);
            amps[i] = gate[0][0] * a0 + gate[0][1] * a1;
            amps[j] = gate[1][0] * a0 + gate[1][1] * a1;
        }
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    pub fn apply_hadamard(&self, q: QubitIndex) -> Result<StateVector> {
        self.apply_single_qubit(q, &hadamard_gate())
    }

    /// Hadamard on each listed qubit.
    pub fn apply_hadamard_each(&self, register: &[QubitIndex]) -> Result<StateVector> {
        self.register_masks(register)?;
        register
            .iter()
            .try_fold(self.clone(), |s, &q| s.apply_hadamard(q))
    }

    /// `|x⟩|y⟩ → |x⟩|y ⊕ f(x)⟩`, with `input_qubits[0]` the most significant
    /// bit of `x`. A pure permutation of amplitudes.
    ///
    /// Query accounting lives in [`crate::oracles::CountingOracle::apply_gate`].
    pub fn apply_boolean_oracle(
        &self,
        f: &BooleanOracle,
        input_qubits: &[QubitIndex],
        output_qubit: QubitIndex,
    ) -> Result<StateVector> {
        if f.arity() != input_qubits.len() {
            return Err(Error::domain(format!(
                "oracle arity {} but {} input qubits",
                f.arity(),
                input_qubits.len()
            )));
        }
        let mut all = input_qubits.to_vec();
        all.push(output_qubit);
        self.register_masks(&all)?;
        let in_masks = self.register_masks(input_qubits)?;
        let out_mask = self.mask(output_qubit)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, a) in self.amps.iter().enumerate() {
            let x = register_value(i, &in_masks);
            let j = if f.eval(x) { i ^ out_mask } else { i };
            amps[j] = *a;
        }
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Multiplies the amplitude of register value `j` by `(-1)^{bits[j]}`.
    pub fn apply_phase_by_bits(&self, bits: &[u8], register: &[QubitIndex]) -> Result<StateVector> {
        let masks = self.register_masks(register)?;
        if bits.len() != 1 << masks.len() {
            return Err(Error::domain(format!(
                "{} phase bits for a {}-qubit register (need {})",
                bits.len(),
                masks.len(),
                1usize << masks.len()
            )));
        }
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if bits[register_value(i, &masks)] & 1 == 1 {
                    -a
                } else {
                    a
                }
            })
            .collect();
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Born probabilities of each value of `register` (first qubit most significant).
    pub fn register_probabilities(&self, register: &[QubitIndex]) -> Result<Vec<f64>> {
        let masks = self.register_masks(register)?;
        let mut probs = vec![0.0; 1 << masks.len()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[register_value(i, &masks)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// The register value whose probability is at least `1 - tol`, if any.
    pub fn certain_outcome(&self, register: &[QubitIndex], tol: f64) -> Result<Option<usize>> {
        let probs = self.register_probabilities(register)?;
        Ok(probs.iter().position(|&p| p >= 1.0 - tol))
    }

    /// Projective measurement of `register` in the computational basis.
    pub fn measure(
        &self,
        register: &[QubitIndex],
        rng: &mut RandomSource,
    ) -> Result<(usize, StateVector)> {
        let masks = self.register_masks(register)?;
        let probs = self.register_probabilities(register)?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Consistency(format!(
                "outcome probabilities sum to {total}"
            )));
        }
        let u = rng.next_f64() * total;
        let mut acc = 0.0;
        // fall back to the last outcome with nonzero weight if rounding leaves u uncovered
        let mut outcome = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for (v, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc && p > 0.0 {
                outcome = v;
                break;
            }
        }
        let scale = 1.0 / probs[outcome].sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if register_value(i, &masks) == outcome {
                    a * scale
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok((
            outcome,
            StateVector {
                num_qubits: self.num_qubits,
                amps,
            },
        ))
    }

    /// `Σ|⟨eᵢ|ψ⟩|²` over an orthonormal basis of a subspace.
    pub fn probability_in_subspace(&self, basis: &[StateVector]) -> Result<f64> {
        check_orthonormal(basis)?;
        basis.iter().try_fold(0.0, |acc, e| {
            Ok(acc + inner_product(e, self)?.norm_sqr())
        })
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Amplitude> {
    if a.dim() != b.dim() {
        return Err(Error::domain(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// True iff `|⟨a|b⟩| ≥ 1 - tol`. States of different dimension are never equal.
pub fn equal_up_to_global_phase(a: &StateVector, b: &StateVector, tol: f64) -> bool {
    match inner_product(a, b) {
        Ok(ip) => ip.norm() >= 1.0 - tol,
        Err(_) => false,
    }
}

/// Errors unless the vectors are pairwise orthonormal within [`NORM_TOL`].
pub fn check_orthonormal(basis: &[StateVector]) -> Result<()> {
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i..] {
            let ip = inner_product(a, b)?;
            let expected = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
            if (ip - Complex64::new(expected, 0.0)).norm() > NORM_TOL {
                return Err(Error::domain("basis is not orthonormal"));
            }
        }
    }
    Ok(())
}

/// Dense `d×d` projector `Σ|eᵢ⟩⟨eᵢ|`, row-major.
pub fn projector(basis: &[StateVector]) -> Result<Vec<Amplitude>> {
    check_orthonormal(basis)?;
    let dim = basis
        .first()
        .ok_or_else(|| Error::domain("empty basis"))?
        .dim();
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for e in basis {
        for r in 0..dim {
            for c in 0..dim {
                m[r * dim + c] += e.amps[r] * e.amps[c].conj();
            }
        }
    }
    Ok(m)
}

fn register_value(index: usize, masks: &[usize]) -> usize {
    masks
        .iter()
        .fold(0, |acc, &m| (acc << 1) | usize::from(index & m != 0))
}

fn check_qubit_count(k: usize) -> Result<()> {
    if k == 0 || k > MAX_QUBITS {
        return Err(Error::domain(format!(
            "qubit count {k} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::domain(format!(
            "amplitude vector length {len} is not 2^k with k ≥ 1"
        )));
    }
    let k = len.trailing_zeros() as usize;
    check_qubit_count(k)?;
    Ok(k)
}

fn check_unitary(g: &Gate1) -> Result<()> {
    for r in 0..2 {
        for c in 0..2 {
            let dot: Complex64 = (0..2).map(|k| g[k][r].conj() * g[k][c]).sum();
            let expected = if r == c { 1.0 } else { 0.0 };
            if (dot - Complex64::new(expected, 0.0)).norm() > NORM_TOL {
                return Err(Error::domain("single-qubit gate is not unitary"));
            }
        }
    }
    Ok(())
}

impl fmt::Display for StateVector {
    /// Nonzero terms as `(re+imi)|bits⟩`, joined with `+`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() < 1e-12 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let ket = crate::bits::BitString::from_index(i, self.num_qubits);
            if a.im.abs() < 1e-12 {
                write!(f, "{:.4}|{ket}⟩", a.re)?;
            } else {
                write!(f, "({:.4}{:+.4}i)|{ket}⟩", a.re, a.im)?;
            }
        }
        Ok(())
    }
}
