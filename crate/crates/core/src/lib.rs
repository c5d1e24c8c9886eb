//! Randomized adaptive quantum state preparation.
//!
//! A dense simulator for up to [`MAX_QUBITS`] qubits together with the
//! adaptive engine that grows a circuit one randomized rotation at a time:
//! at step `k` a direction `H_k` is drawn (a Haar or 2-design conjugate of a
//! fixed Pauli generator, or a uniform pick from a Pauli pool), the gradient
//! `i<psi|[H_k, H_p]|psi>` is measured and the rotation `exp(-i theta H_k)`
//! with `theta = -gamma * gradient` is appended.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and the
//! parallel sweep harness live in the `raq-prep` companion crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod bounds;
pub mod dilation;
pub mod engine;
mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod random;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 12;

/// Largest composite register (system + ancilla) for density-matrix runs.
pub const MAX_DENSITY_QUBITS: usize = 10;

pub(crate) fn check_qubit_cap(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("qubit count must be at least 1".into()));
    }
    if n > cap {
        return Err(Error::QubitCap { requested: n, cap });
    }
    Ok(())
}
