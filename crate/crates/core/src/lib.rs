//! Hypervector factorization by amplitude amplification.
//!
//! * [`hdc`]: bipolar hypervector algebra, codebooks and the exhaustive
//!   classical factorizer.
//! * [`qsim`]: dense statevector simulator with the gate set the oracle needs.
//! * [`hdqf`]: state preparation, oracle construction and the Grover loop.
//! * [`noise`]: thermal relaxation channels, trajectories and a density-matrix
//!   reference.
//! * [`resonator`]: the classical resonator-network baseline.

pub mod error;
pub mod hdc;
pub mod hdqf;
pub mod noise;
pub mod qsim;
pub mod resonator;
pub mod rng;

pub use error::{Error, Result};
