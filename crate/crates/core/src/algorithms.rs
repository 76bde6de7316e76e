//! Oracle algorithms on the simulator and the classical reduction behind
//! Shor's factoring.
//!
//! Register layout for the two-register circuits: qubit 0 is the input
//! register, qubit 1 the output register. Deutsch-Jozsa uses qubits
//! `0..n` as input and qubit `n` as output.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::{BooleanOracle, CountingOracle, OracleClass};
use crate::qsim::{self, qubits, QubitIndex, StateVector};
use crate::rng::RandomSource;

/// Probability threshold for treating a measurement outcome as certain.
const CERTAINTY_TOL: f64 = 1e-9;

/// Largest Deutsch-Jozsa input register (one more qubit holds the output).
pub const MAX_DJ_ARITY: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Constant,
    Balanced,
    Inconclusive,
}

impl From<OracleClass> for Verdict {
    fn from(c: OracleClass) -> Self {
        match c {
            OracleClass::Constant => Verdict::Constant,
            OracleClass::Balanced => Verdict::Balanced,
            OracleClass::Neither => Verdict::Inconclusive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeutschOutcome {
    pub verdict: Verdict,
    pub oracle_queries: u64,
}

fn require_promise(f: &BooleanOracle) -> Result<()> {
    if f.classify() == OracleClass::Neither {
        return Err(Error::PromiseViolation(format!(
            "oracle {} is neither constant nor balanced",
            f.to_hex()
        )));
    }
    Ok(())
}

fn require_arity_one(f: &BooleanOracle) -> Result<()> {
    if f.arity() != 1 {
        return Err(Error::domain(format!(
            "expected an arity-1 oracle, got arity {}",
            f.arity()
        )));
    }
    Ok(())
}

/// `U_f H₀ |00⟩`: one of c₁, c₂ (constant) or b₁, b₂ (balanced).
pub fn deutsch_final_state(f: &mut CountingOracle) -> Result<StateVector> {
    require_arity_one(f.inner())?;
    let s = StateVector::basis(2, 0)?.apply_hadamard(QubitIndex(0))?;
    f.apply_gate(&s, &[QubitIndex(0)], QubitIndex(1))
}

/// Probability that the original algorithm ends inconclusive: the weight of
/// the final state on the ray shared by both planes.
pub fn deutsch_inconclusive_probability(f: &BooleanOracle) -> Result<f64> {
    let fin = deutsch_final_state(&mut CountingOracle::new(f.clone()))?;
    fin.probability_in_subspace(&[plane_pair().intersection_ray])
}

/// Deutsch's original XOR algorithm. Succeeds with probability 1/2.
///
/// The prime-basis measurement is done as `H⊗H` followed by a
/// computational-basis measurement: `00` is inconclusive, `01` means
/// constant and `11` balanced.
pub fn deutsch_original(f: &BooleanOracle, rng: &mut RandomSource) -> Result<DeutschOutcome> {
    require_arity_one(f)?;
    require_promise(f)?;
    let mut oracle = CountingOracle::new(f.clone());
    let fin = deutsch_final_state(&mut oracle)?;
    let rotated = fin.apply_hadamard_each(&qubits(0..2))?;
    let (outcome, _) = rotated.measure(&qubits(0..2), rng)?;
    let verdict = match outcome {
        0b00 => Verdict::Inconclusive,
        0b01 => Verdict::Constant,
        0b11 => Verdict::Balanced,
        _ => {
            return Err(Error::Consistency(
                "outcome 1'0' is orthogonal to both planes".into(),
            ))
        }
    };
    Ok(DeutschOutcome {
        verdict,
        oracle_queries: oracle.queries(),
    })
}

/// State of both registers after the oracle in the Cleve variant (output
/// register prepared in `|1⟩`): `±|0'1'⟩` for constant, `±|1'1'⟩` for balanced.
pub fn cleve_final_state(f: &mut CountingOracle) -> Result<StateVector> {
    require_arity_one(f.inner())?;
    let s = StateVector::basis(2, 0b01)?.apply_hadamard_each(&qubits(0..2))?;
    f.apply_gate(&s, &[QubitIndex(0)], QubitIndex(1))
}

/// Cleve's deterministic variant: one query, never inconclusive.
pub fn deutsch_cleve(f: &BooleanOracle) -> Result<DeutschOutcome> {
    require_arity_one(f)?;
    require_promise(f)?;
    let mut oracle = CountingOracle::new(f.clone());
    let fin = cleve_final_state(&mut oracle)?;
    let rotated = fin.apply_hadamard(QubitIndex(0))?;
    let verdict = match rotated.certain_outcome(&[QubitIndex(0)], CERTAINTY_TOL)? {
        Some(0) => Verdict::Constant,
        Some(_) => Verdict::Balanced,
        None => {
            return Err(Error::Consistency(
                "input register not in a prime basis state".into(),
            ))
        }
    };
    Ok(DeutschOutcome {
        verdict,
        oracle_queries: oracle.queries(),
    })
}

/// Deutsch-Jozsa on `n ≤ 7` input bits. The input register reads all
/// zeros iff `f` is constant; that probability is exactly 1 or 0 under
/// the promise, so the verdict is read off it directly.
pub fn deutsch_jozsa(f: &BooleanOracle) -> Result<DeutschOutcome> {
    let n = f.arity();
    if n == 0 || n > MAX_DJ_ARITY {
        return Err(Error::domain(format!(
            "Deutsch-Jozsa needs 1..={MAX_DJ_ARITY} input bits, got {n}"
        )));
    }
    require_promise(f)?;
    let inputs = qubits(0..n);
    let mut oracle = CountingOracle::new(f.clone());
    let s = StateVector::basis(n + 1, 1)?.apply_hadamard_each(&qubits(0..n + 1))?;
    let s = oracle.apply_gate(&s, &inputs, QubitIndex(n))?;
    let s = s.apply_hadamard_each(&inputs)?;
    let p_zero = s.register_probabilities(&inputs)?[0];
    let verdict = if p_zero >= 1.0 - CERTAINTY_TOL {
        Verdict::Constant
    } else if p_zero <= CERTAINTY_TOL {
        Verdict::Balanced
    } else {
        return Err(Error::Consistency(format!(
            "all-zeros probability {p_zero} is neither 0 nor 1"
        )));
    };
    Ok(DeutschOutcome {
        verdict,
        oracle_queries: oracle.queries(),
    })
}

/// The constant and balanced planes of the two-register Deutsch circuit.
#[derive(Clone, Debug)]
pub struct PlanePair {
    pub constant_basis: [StateVector; 2],
    pub balanced_basis: [StateVector; 2],
    /// The ray common to both planes.
    pub intersection_ray: StateVector,
}

fn real_state(v: &[f64]) -> StateVector {
    StateVector::from_real(v).expect("fixed nonzero vector")
}

pub fn plane_pair() -> PlanePair {
    let c1 = real_state(&[1.0, 0.0, 1.0, 0.0]);
    let c2 = real_state(&[0.0, 1.0, 0.0, 1.0]);
    let b1 = real_state(&[1.0, 0.0, 0.0, 1.0]);
    let b2 = real_state(&[0.0, 1.0, 1.0, 0.0]);
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let ray = StateVector::linear_combination(&[(r, &c1), (r, &c2)]).expect("c1 ⊥ c2");
    PlanePair {
        constant_basis: [c1, c2],
        balanced_basis: [b1, b2],
        intersection_ray: ray,
    }
}

/// `|a'b'⟩ = H|a⟩ ⊗ H|b⟩`.
pub fn prime_basis_state(a: usize, b: usize) -> StateVector {
    StateVector::basis(2, 2 * a + b)
        .and_then(|s| s.apply_hadamard_each(&qubits(0..2)))
        .expect("two-qubit basis state")
}

/// Numbers that back the plane-geometry claims, all expected to be 0 or ±1/2.
#[derive(Clone, Debug, Serialize)]
pub struct PlaneReport {
    pub c1_c2: f64,
    pub b1_b2: f64,
    /// `⟨cᵢ|bⱼ⟩` for (i, j) in row-major order.
    pub c_b: [f64; 4],
    pub commutator_max: f64,
    /// `|⟨ray|(c₁+c₂)/√2⟩|`, `|⟨ray|(b₁+b₂)/√2⟩|` and `|⟨ray|0'0'⟩|`.
    pub ray_overlaps: [f64; 3],
    /// Largest deviation from 1 of the mutual projection probabilities
    /// between each plane's original and prime-basis spans.
    pub prime_span_deviation: f64,
}

impl PlanePair {
    pub fn prime_constant_basis() -> [StateVector; 2] {
        [prime_basis_state(0, 0), prime_basis_state(0, 1)]
    }

    pub fn prime_balanced_basis() -> [StateVector; 2] {
        [prime_basis_state(0, 0), prime_basis_state(1, 1)]
    }

    pub fn report(&self) -> Result<PlaneReport> {
        let [c1, c2] = &self.constant_basis;
        let [b1, b2] = &self.balanced_basis;
        let ip = |a: &StateVector, b: &StateVector| -> Result<f64> {
            let v = qsim::inner_product(a, b)?;
            if v.im.abs() > 1e-12 {
                return Err(Error::Consistency("plane states should be real".into()));
            }
            Ok(v.re)
        };
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let c_sum = StateVector::linear_combination(&[(r, c1), (r, c2)])?;
        let b_sum = StateVector::linear_combination(&[(r, b1), (r, b2)])?;
        let ray = &self.intersection_ray;

        let mut prime_dev: f64 = 0.0;
        for (plane, prime) in [
            (&self.constant_basis, Self::prime_constant_basis()),
            (&self.balanced_basis, Self::prime_balanced_basis()),
        ] {
            for v in prime.iter() {
                prime_dev = prime_dev.max((1.0 - v.probability_in_subspace(plane)?).abs());
            }
            for v in plane.iter() {
                prime_dev = prime_dev.max((1.0 - v.probability_in_subspace(&prime)?).abs());
            }
        }

        Ok(PlaneReport {
            c1_c2: ip(c1, c2)?,
            b1_b2: ip(b1, b2)?,
            c_b: [ip(c1, b1)?, ip(c1, b2)?, ip(c2, b1)?, ip(c2, b2)?],
            commutator_max: commutator_max(&self.constant_basis, &self.balanced_basis)?,
            ray_overlaps: [
                qsim::inner_product(ray, &c_sum)?.norm(),
                qsim::inner_product(ray, &b_sum)?.norm(),
                qsim::inner_product(ray, &prime_basis_state(0, 0))?.norm(),
            ],
            prime_span_deviation: prime_dev,
        })
    }
}

/// Largest entry magnitude of `[P₁, P₂]` for the projectors onto two spans.
pub fn commutator_max(p1: &[StateVector], p2: &[StateVector]) -> Result<f64> {
    let a = qsim::projector(p1)?;
    let b = qsim::projector(p2)?;
    let dim = p1[0].dim();
    if p2[0].dim() != dim {
        return Err(Error::domain("projectors act on different spaces"));
    }
    let mut worst: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            let mut ab = Complex64::new(0.0, 0.0);
            let mut ba = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                ab += a[r * dim + k] * b[k * dim + c];
                ba += b[r * dim + k] * a[k * dim + c];
            }
            worst = worst.max((ab - ba).norm());
        }
    }
    Ok(worst)
}

pub fn projectors_commute(p1: &[StateVector], p2: &[StateVector]) -> Result<bool> {
    Ok(commutator_max(p1, p2)? < 1e-9)
}

/// Euclid's algorithm.
pub fn gcd(a: u64, b: u64) -> Result<u64> {
    if a == 0 && b == 0 {
        return Err(Error::domain("gcd(0, 0) is undefined"));
    }
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    Ok(a)
}

pub fn mod_pow(base: u64, exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut result: u128 = 1;
    let mut b = base as u128 % m;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    result as u64
}

/// Smallest `r > 0` with `a^r ≡ 1 (mod N)`, by direct iteration.
///
/// This is the classical stand-in for quantum period finding.
pub fn multiplicative_period(a: u64, n: u64) -> Result<u64> {
    if n < 2 || a == 0 || a >= n {
        return Err(Error::domain(format!("need 0 < a < N, got a={a}, N={n}")));
    }
    if gcd(a, n)? != 1 {
        return Err(Error::domain(format!("{a} is not coprime to {n}")));
    }
    let mut x = a % n;
    let mut r = 1;
    while x != 1 {
        x = (x as u128 * a as u128 % n as u128) as u64;
        r += 1;
    }
    Ok(r)
}

/// A base together with its period and, when the reduction succeeds, the factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodReduction {
    pub n: u64,
    pub a: u64,
    pub r: u64,
    pub factors: Option<(u64, u64)>,
}

/// `gcd(a^{r/2} ∓ 1, N)` when `r` is even and `a^{r/2} ≢ -1 (mod N)`.
pub fn factors_from_period(a: u64, r: u64, n: u64) -> Result<Option<(u64, u64)>> {
    let period = multiplicative_period(a, n)?;
    if period != r {
        return Err(Error::domain(format!(
            "{r} is not the period of {a} mod {n} (it is {period})"
        )));
    }
    if r % 2 == 1 {
        return Ok(None);
    }
    let half = mod_pow(a, r / 2, n);
    if half == n - 1 {
        return Ok(None);
    }
    // half ≠ 1 because r is minimal, so half - 1 > 0
    let p = gcd(half - 1, n)?;
    let q = gcd(half + 1, n)?;
    let (p, q) = (p.min(q), p.max(q));
    if p <= 1 || p.checked_mul(q) != Some(n) {
        return Err(Error::domain(format!(
            "{n} is not a product of two distinct primes"
        )));
    }
    Ok(Some((p, q)))
}

/// Runs the reduction for base `a`, computing the period first.
pub fn reduce_with_base(a: u64, n: u64) -> Result<PeriodReduction> {
    let r = multiplicative_period(a, n)?;
    Ok(PeriodReduction {
        n,
        a,
        r,
        factors: factors_from_period(a, r, n)?,
    })
}

/// One attempt of [`factor_semiprime`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorAttempt {
    pub a: u64,
    /// `None` when `a` shared a factor with `N` and no period was needed.
    pub r: Option<u64>,
    pub factors: Option<(u64, u64)>,
}

pub const MAX_SEMIPRIME: u64 = 1_000_000;

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Factors an odd semiprime with distinct prime factors by drawing random
/// bases and running the period reduction on each.
///
/// Returns the factors sorted, plus the attempt history.
pub fn factor_semiprime(
    n: u64,
    rng: &mut RandomSource,
    max_attempts: u32,
) -> Result<((u64, u64), Vec<FactorAttempt>)> {
    if n.is_multiple_of(2) || !(15..MAX_SEMIPRIME).contains(&n) {
        return Err(Error::domain(format!(
            "{n} is not an odd number in 15..{MAX_SEMIPRIME}"
        )));
    }
    let root = (n as f64).sqrt().round() as u64;
    if root * root == n {
        return Err(Error::domain(format!("{n} is a perfect square")));
    }
    if is_prime(n) {
        return Err(Error::domain(format!("{n} is prime")));
    }
    let mut history = Vec::new();
    for _ in 0..max_attempts {
        let a = rng.range(2, n - 1);
        let g = gcd(a, n)?;
        if g > 1 {
            let pair = (g.min(n / g), g.max(n / g));
            history.push(FactorAttempt {
                a,
                r: None,
                factors: Some(pair),
            });
            return Ok((pair, history));
        }
        let red = reduce_with_base(a, n)?;
        history.push(FactorAttempt {
            a,
            r: Some(red.r),
            factors: red.factors,
        });
        if let Some(pair) = red.factors {
            return Ok((pair, history));
        }
    }
    Err(Error::RetryExhausted {
        attempts: max_attempts,
    })
}
