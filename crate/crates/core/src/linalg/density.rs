use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{hermitian_eigen, qubit_bit, StateVector, NORM_TOL};
use crate::{check_qubit_cap, Error, Result, C64, MAX_DENSITY_QUBITS};

/// Eigenvalues below this count as a positivity violation.
pub const POSITIVITY_TOL: f64 = 1e-9;

/// Density matrix over `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(n_qubits: usize, matrix: DMatrix<C64>) -> Result<Self> {
        check_qubit_cap(n_qubits, MAX_DENSITY_QUBITS)?;
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidInput(alloc::format!(
                "expected a {dim}x{dim} density matrix"
            )));
        }
        let rho = Self { n_qubits, matrix };
        if rho.hermiticity_defect() > NORM_TOL {
            return Err(Error::NotHermitian);
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(tr));
        }
        let (vals, _) = hermitian_eigen(&rho.matrix);
        if vals.first().is_some_and(|&v| v < -POSITIVITY_TOL) {
            return Err(Error::InvalidInput("density matrix has a negative eigenvalue".into()));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(n_qubits: usize, matrix: DMatrix<C64>) -> Self {
        Self { n_qubits, matrix }
    }

    /// `|psi><psi|`.
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        check_qubit_cap(state.n_qubits(), MAX_DENSITY_QUBITS)?;
        let amps = state.amplitudes();
        let dim = amps.len();
        Ok(Self::from_raw(
            state.n_qubits(),
            DMatrix::from_fn(dim, dim, |i, j| amps[i] * amps[j].conj()),
        ))
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubit_cap(n_qubits, MAX_DENSITY_QUBITS)?;
        let dim = 1usize << n_qubits;
        Ok(Self::from_raw(
            n_qubits,
            DMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0),
        ))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|d| d.re).sum()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity_with(&self, target: &StateVector) -> Result<f64> {
        if target.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: target.n_qubits(),
            });
        }
        let t = target.amplitudes();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += t[i].conj() * self.matrix[(i, j)] * t[j];
            }
        }
        Ok(acc.re)
    }

    /// `self ⊗ other` with `self` on the leading qubits.
    pub fn kron(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        check_qubit_cap(self.n_qubits + other.n_qubits, MAX_DENSITY_QUBITS)?;
        Ok(Self::from_raw(
            self.n_qubits + other.n_qubits,
            self.matrix.kronecker(&other.matrix),
        ))
    }

    /// Reduced state on the qubits in `keep`, listed in register order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits;
        if keep.is_empty() {
            return Err(Error::InvalidQubitSet("keep set is empty".into()));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.len() != keep.len() {
            return Err(Error::InvalidQubitSet("keep set has duplicates".into()));
        }
        if let Some(&q) = kept.iter().find(|&&q| q >= n) {
            return Err(Error::InvalidQubitSet(alloc::format!(
                "qubit {q} out of range for {n} qubits"
            )));
        }
        let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
        let kept_index = scatter_table(n, &kept);
        let traced_index = scatter_table(n, &traced);
        let dk = kept_index.len();
        let out = DMatrix::from_fn(dk, dk, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &traced_index {
                acc += self.matrix[(kept_index[i] | t, kept_index[j] | t)];
            }
            acc
        });
        Ok(Self::from_raw(kept.len(), out))
    }
}

/// Full-register index for each local index over `qubits` (in order).
fn scatter_table(n: usize, qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|local| {
            qubits
                .iter()
                .enumerate()
                .filter(|(pos, _)| local & (1 << (k - 1 - pos)) != 0)
                .fold(0usize, |acc, (_, &q)| acc | qubit_bit(n, q))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn assert_close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = tol);
        }
    }

    #[test]
    fn product_state_trace() {
        let rho = DensityMatrix::from_pure(&StateVector::from_label("00").unwrap()).unwrap();
        let reduced = rho.partial_trace(&[0]).unwrap();
        let zero = DensityMatrix::from_pure(&StateVector::zero(1).unwrap()).unwrap();
        assert_close(reduced.matrix(), zero.matrix(), 1e-15);
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        let bell = StateVector::from_amplitudes(2, alloc::vec![s, z, z, s]).unwrap();
        let rho = DensityMatrix::from_pure(&bell).unwrap();
        for keep in [[0], [1]] {
            let reduced = rho.partial_trace(&keep).unwrap();
            assert_close(
                reduced.matrix(),
                DensityMatrix::maximally_mixed(1).unwrap().matrix(),
                1e-15,
            );
        }
    }

    #[test]
    fn separable_factorization_recovers_factors() {
        let s = DensityMatrix::from_pure(&StateVector::from_label("+0").unwrap()).unwrap();
        let a = DensityMatrix::maximally_mixed(1).unwrap();
        let joint = s.kron(&a).unwrap();
        assert_close(joint.partial_trace(&[0, 1]).unwrap().matrix(), s.matrix(), 1e-12);
        assert_close(joint.partial_trace(&[2]).unwrap().matrix(), a.matrix(), 1e-12);
        // Non-adjacent kept qubits keep register order.
        let r = joint.partial_trace(&[0, 2]).unwrap();
        let plus = DensityMatrix::from_pure(&StateVector::from_label("+").unwrap()).unwrap();
        assert_close(r.matrix(), plus.kron(&a).unwrap().matrix(), 1e-12);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(matches!(rho.partial_trace(&[]), Err(Error::InvalidQubitSet(_))));
        assert!(matches!(rho.partial_trace(&[2]), Err(Error::InvalidQubitSet(_))));
        assert!(matches!(rho.partial_trace(&[0, 0]), Err(Error::InvalidQubitSet(_))));
    }

    #[test]
    fn validation() {
        let bad = DMatrix::identity(2, 2) * C64::new(1.0, 0.0);
        assert!(matches!(DensityMatrix::new(1, bad), Err(Error::NotNormalized(_))));
        let neg = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.5, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.5, 0.0)],
        );
        assert!(DensityMatrix::new(1, neg).is_err());
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert_abs_diff_eq!(mixed.purity(), 0.25, epsilon = 1e-15);
        assert!(DensityMatrix::new(2, mixed.matrix().clone()).is_ok());
    }
}
