//! Simulation and placement toolkit for exchange-only spin qubits on 2D
//! quantum-dot grids.

pub mod benchmark;
pub mod clifford;
pub mod encoding;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod noise;
pub mod pulse;
pub mod pulse_seq;
pub mod rng;
pub mod spin_sim;

pub use error::{Error, Result};
