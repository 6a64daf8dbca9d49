//! Symmetry-verification error mitigation on a noisy density-matrix
//! simulator, with hydrogen-molecule VQE experiments.
//!
//! - [`pauli`]: Pauli strings, weighted sums and symmetry specifications.
//! - [`densim`]: density matrices, noise channels and circuit simulation.
//! - [`circuitlib`]: timed circuits, ansätze and verification circuits.
//! - [`mitigate`]: post-selection, symmetry and anticommuting subspace expansion.
//! - [`symtools`]: ancilla extension, symmetry rotation and observable reduction.
//! - [`chemdata`]: tabulated Hamiltonian coefficients.
//! - [`experiments`]: dissociation sweeps, decoherence scans and the
//!   ancilla-versus-in-line comparison.
//! - [`cli`]: the `symverify` command line.

pub mod chemdata;
pub mod circuitlib;
pub mod cli;
pub mod densim;
pub mod error;
pub mod experiments;
pub mod mitigate;
pub mod pauli;
pub mod symtools;

pub use densim::{simulate, DensityMatrix, NoiseModel};
pub use error::{Error, Result};
pub use pauli::{Letter, PauliString, PauliSum, SymmetrySpec};
