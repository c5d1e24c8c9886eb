use core::f64::consts::FRAC_PI_4;

use super::Direction;
use crate::hamiltonian::ProblemHamiltonian;
use crate::linalg::{commutator_expectation, DenseOperator, Observable, StateVector};
use crate::random::RngStream;
use crate::{Error, Result, C64};

/// `dJ/dtheta` at zero: `i <psi|[H_k, H_p]|psi> = -2 Im <H_k psi|H_p psi>`.
pub fn gradient_exact<O>(state: &StateVector, h_k: &O, h_p: &ProblemHamiltonian) -> Result<f64>
where
    O: Observable + ?Sized,
{
    commutator_expectation(state, h_k, h_p)
}

/// Same derivative through the Riemannian gradient: the Hilbert-Schmidt
/// product `<[|psi><psi|, H_p], i H_k> = Tr(G^† i H_k)`. Dense and slow;
/// meant as an independent check.
pub fn gradient_hilbert_schmidt(
    state: &StateVector,
    h_k: &DenseOperator,
    h_p: &ProblemHamiltonian,
) -> Result<f64> {
    let n = state.n_qubits();
    if h_k.n_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: h_k.n_qubits() });
    }
    state.check_same(h_p.n_qubits())?;
    let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
    let rho = &psi * psi.adjoint();
    let hp = h_p.to_dense();
    let hp = hp.matrix();
    let grad = &rho * hp - hp * &rho;
    let ihk = h_k.matrix() * C64::new(0.0, 1.0);
    let mut acc = C64::new(0.0, 0.0);
    for (g, b) in grad.iter().zip(ihk.iter()) {
        acc += g.conj() * b;
    }
    Ok(acc.re)
}

/// Central difference `(J(h) - J(-h)) / 2h` of the cost along `direction`.
pub fn gradient_finite_difference(
    state: &StateVector,
    direction: &Direction,
    h_p: &ProblemHamiltonian,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let plus = h_p.energy(&direction.rotate(state, h)?)?;
    let minus = h_p.energy(&direction.rotate(state, -h)?)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Parameter-shift estimate `J(pi/4) - J(-pi/4)` where each cost is the
/// mean of `shots` simulated measurements of `H_p`.
pub fn gradient_shot_estimate(
    state: &StateVector,
    direction: &Direction,
    h_p: &ProblemHamiltonian,
    shots: u64,
    rng: &mut RngStream,
) -> Result<f64> {
    if !direction.is_involutory() {
        return Err(Error::NotInvolutory);
    }
    state.check_same(h_p.n_qubits())?;
    let plus = direction.rotate(state, FRAC_PI_4)?;
    let minus = direction.rotate(state, -FRAC_PI_4)?;
    let j_plus = h_p.sample_energy(plus.amplitudes(), shots, rng)?;
    let j_minus = h_p.sample_energy(minus.amplitudes(), shots, rng)?;
    Ok(j_plus - j_minus)
}
