//! Exact determinants of dense non-singular integer matrices.
//!
//! The engine combines early-terminating Chinese remaindering, denominator
//! extraction from a random linear system, division by modular Hermite normal
//! forms and by lattice ("HCOL") bases, and a guaranteed unimodularity check.
//! Every returned value is certified; nothing is accepted on probabilistic
//! grounds alone.

pub mod bench;
pub mod crt;
pub mod dixon;
pub mod engine;
pub mod error;
pub mod field;
pub mod generate;
pub mod hnf;
pub mod intmat;
pub mod modular;
pub mod primes;
pub mod rns;
pub mod unimodular;

pub use engine::{determinant, determinant_with_strategy, EngineConfig, Strategy};
pub use error::{Error, Result};
pub use intmat::{format_matrix, hadamard_bits, maxentry, parse_matrix, IntMat};
pub use unimodular::{verify_unimodular, UnimodResult};
