//! Exact few-qubit state-vector simulation, Boolean oracle algorithms
//! (Deutsch, Cleve, Deutsch-Jozsa, the classical half of Shor's factoring)
//! and two-party nonlocal games (Deutsch-Jozsa game, CHSH).
//!
//! Everything here is desk scale: registers are dense and capped at 10
//! qubits, and every random draw goes through [`RandomSource`] so runs are
//! replayable from a seed.

pub mod algorithms;
pub mod bits;
pub mod error;
pub mod games;
pub mod oracles;
pub mod qsim;
pub mod rng;
pub mod stats;

pub use bits::BitString;
pub use error::{Error, Result};
pub use oracles::{BooleanOracle, CountingOracle, OracleClass};
pub use qsim::{QubitIndex, StateVector};
pub use rng::RandomSource;
