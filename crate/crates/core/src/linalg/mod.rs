//! Dense complex linear algebra: statevectors, density matrices, Pauli
//! strings, dense operators, expectations and partial traces.
//!
//! Qubit 0 is the leftmost tensor factor, so it addresses the most
//! significant bit of a basis index: in an `n`-qubit register qubit `q`
//! lives at bit `n - 1 - q`.

mod density;
mod operator;
mod pauli;
mod state;

pub use density::DensityMatrix;
pub use operator::{
    apply_dense, commutator_expectation, commutator_expectation_naive, expectation, expm_hermitian,
    hermitian_eigen, DenseOperator, Observable, PauliSum, SpectralNorm,
};
pub use pauli::{apply_pauli_rotation, weight_graded_pool, Pauli, PauliString};
pub use state::StateVector;

use crate::C64;

/// Tolerance for the normalization invariant of states and density matrices.
pub const NORM_TOL: f64 = 1e-10;

/// Bit of a basis index that addresses qubit `q` in an `n`-qubit register.
#[inline]
pub(crate) fn qubit_bit(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

/// `<u|v>` with the conjugate on the left.
#[inline]
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        acc += a.conj() * b;
    }
    acc
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}
