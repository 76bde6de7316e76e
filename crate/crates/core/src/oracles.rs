//! Boolean functions given by explicit truth tables.
//!
//! Wire and log form is `{"n": arity, "table": "<hex>"}`. The hex string is
//! the truth table read as an unsigned integer with `f(x)` at bit `x`
//! (`f(0)` is the least significant bit), printed big-endian in lowercase,
//! zero-padded to `max(1, 2^n / 4)` digits. So `[0,1]` is `"2"`,
//! `[1,0,0,0]` is `"1"` and `[0,1,1,0]` is `"6"`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qsim::{QubitIndex, StateVector};
use crate::rng::RandomSource;

/// Largest arity accepted; keeps tables and simulated registers small.
pub const MAX_ARITY: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BooleanOracle {
    arity: usize,
    table: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleClass {
    Constant,
    Balanced,
    Neither,
}

impl BooleanOracle {
    pub fn new(arity: usize, table: Vec<u8>) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::domain(format!("arity {arity} above {MAX_ARITY}")));
        }
        if table.len() != 1 << arity {
            return Err(Error::domain(format!(
                "truth table has {} entries, arity {arity} needs {}",
                table.len(),
                1usize << arity
            )));
        }
        if table.iter().any(|&b| b > 1) {
            return Err(Error::domain("truth table entries must be 0 or 1"));
        }
        Ok(BooleanOracle { arity, table })
    }

    /// Infers the arity from the table length.
    pub fn from_table(table: Vec<u8>) -> Result<Self> {
        if !table.len().is_power_of_two() {
            return Err(Error::domain("truth table length is not a power of two"));
        }
        Self::new(table.len().trailing_zeros() as usize, table)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn eval(&self, x: usize) -> bool {
        self.table[x] == 1
    }

    pub fn classify(&self) -> OracleClass {
        classify(self)
    }

    /// Every truth table of the given arity (2^(2^n) of them).
    pub fn all(arity: usize) -> Vec<BooleanOracle> {
        assert!(arity <= 4, "enumerating all tables above arity 4 is pointless");
        let len = 1usize << arity;
        (0..1u64 << len)
            .map(|v| BooleanOracle {
                arity,
                table: (0..len).map(|x| ((v >> x) & 1) as u8).collect(),
            })
            .collect()
    }

    pub fn to_hex(&self) -> String {
        let digits = (self.table.len() / 4).max(1);
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = (0..4)
                    .filter(|b| self.table.get(4 * d + b) == Some(&1))
                    .fold(0u32, |acc, b| acc | (1 << b));
                std::char::from_digit(nibble, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(arity: usize, hex: &str) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::domain(format!("arity {arity} above {MAX_ARITY}")));
        }
        let len = 1usize << arity;
        let digits = (len / 4).max(1);
        if hex.len() != digits {
            return Err(Error::domain(format!(
                "hex table for arity {arity} needs {digits} digits, got {}",
                hex.len()
            )));
        }
        let mut table = vec![0u8; len];
        for (pos, ch) in hex.chars().rev().enumerate() {
            let nibble = ch
                .to_digit(16)
                .ok_or_else(|| Error::domain(format!("bad hex digit {ch:?}")))?;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let x = 4 * pos + b;
                    if x >= len {
                        return Err(Error::domain("hex table sets bits beyond the table"));
                    }
                    table[x] = 1;
                }
            }
        }
        Self::new(arity, table)
    }
}

pub fn classify(f: &BooleanOracle) -> OracleClass {
    let ones = f.table.iter().filter(|&&b| b == 1).count();
    if ones == 0 || ones == f.table.len() {
        OracleClass::Constant
    } else if 2 * ones == f.table.len() {
        OracleClass::Balanced
    } else {
        OracleClass::Neither
    }
}

/// A random oracle of the requested class. Balanced tables are uniform over
/// all `C(2^n, 2^{n-1})` of them.
pub fn random_promised_oracle(
    n: usize,
    class: OracleClass,
    rng: &mut RandomSource,
) -> Result<BooleanOracle> {
    if n == 0 || n > MAX_ARITY {
        return Err(Error::domain(format!("arity {n} outside 1..={MAX_ARITY}")));
    }
    let len = 1usize << n;
    let table = match class {
        OracleClass::Constant => vec![rng.next_bit(); len],
        OracleClass::Balanced => {
            let mut t: Vec<u8> = (0..len).map(|i| u8::from(i < len / 2)).collect();
            rng.shuffle(&mut t);
            t
        }
        OracleClass::Neither => {
            return Err(Error::domain("the promise admits only constant or balanced"))
        }
    };
    BooleanOracle::new(n, table)
}

/// Wraps an oracle and counts every classical evaluation and every
/// quantum oracle-gate application.
#[derive(Clone, Debug)]
pub struct CountingOracle {
    inner: BooleanOracle,
    queries: u64,
}

impl CountingOracle {
    pub fn new(inner: BooleanOracle) -> Self {
        CountingOracle { inner, queries: 0 }
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn inner(&self) -> &BooleanOracle {
        &self.inner
    }

    pub fn query(&mut self, x: usize) -> bool {
        self.queries += 1;
        self.inner.eval(x)
    }

    pub fn apply_gate(
        &mut self,
        state: &StateVector,
        input_qubits: &[QubitIndex],
        output_qubit: QubitIndex,
    ) -> Result<StateVector> {
        let out = state.apply_boolean_oracle(&self.inner, input_qubits, output_qubit)?;
        self.queries += 1;
        Ok(out)
    }
}

/// Query both inputs and compare: the classical two-query solution for arity 1.
pub fn classical_decide(f: &mut CountingOracle) -> Result<OracleClass> {
    if f.inner.arity != 1 {
        return Err(Error::domain("classical_decide needs an arity-1 oracle"));
    }
    let f0 = f.query(0);
    let f1 = f.query(1);
    Ok(if f0 == f1 {
        OracleClass::Constant
    } else {
        OracleClass::Balanced
    })
}

#[derive(Serialize, Deserialize)]
struct OracleWire {
    n: usize,
    table: String,
}

impl Serialize for BooleanOracle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OracleWire {
            n: self.arity,
            table: self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BooleanOracle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = OracleWire::deserialize(d)?;
        BooleanOracle::from_hex(w.n, &w.table).map_err(serde::de::Error::custom)
    }
}
