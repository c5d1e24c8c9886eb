use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use super::RngStream;
use crate::linalg::{DenseOperator, StateVector};
use crate::{check_qubit_cap, Result, C64, MAX_QUBITS};

fn complex_gaussian(rng: &mut RngStream) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-random unitary kept in Householder-factored form.
///
/// The sample is the phase-corrected `Q` factor of a complex Ginibre matrix,
/// `V = H_0 H_1 ... H_{d-2} Λ` with `Λ = diag(R_kk / |R_kk|)`. After the
/// first `k` reflections the lower part of column `k` of a Ginibre matrix is
/// again an i.i.d. Gaussian vector, so the reflectors are drawn column by
/// column without ever forming the `d x d` matrix. Applying `V` or `V^†`
/// costs `O(d^2)` instead of the `O(d^3)` of a dense QR.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholderUnitary {
    n_qubits: usize,
    /// Unit reflector `u_k` acting on indices `k..d`.
    reflectors: Vec<Vec<C64>>,
    phases: Vec<C64>,
}

impl HouseholderUnitary {
    pub fn sample(n_qubits: usize, rng: &mut RngStream) -> Result<Self> {
        check_qubit_cap(n_qubits, MAX_QUBITS)?;
        let dim = 1usize << n_qubits;
        let mut reflectors = Vec::with_capacity(dim - 1);
        let mut phases = Vec::with_capacity(dim);
        for k in 0..dim - 1 {
            let mut x: Vec<C64> = (k..dim).map(|_| complex_gaussian(rng)).collect();
            let norm = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let head = x[0].norm();
            let unit_phase = if head > 0.0 { x[0] / head } else { C64::new(1.0, 0.0) };
            // Reflect x onto alpha e_0 with alpha = -phase(x_0) |x|.
            x[0] += unit_phase * norm;
            let v_norm = (2.0 * norm * (norm + head)).sqrt();
            if v_norm > 0.0 {
                x.iter_mut().for_each(|a| *a /= v_norm);
            }
            reflectors.push(x);
            phases.push(-unit_phase);
        }
        let last = complex_gaussian(rng);
        phases.push(if last.norm() > 0.0 { last / last.norm() } else { C64::new(1.0, 0.0) });
        Ok(Self {
            n_qubits,
            reflectors,
            phases,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn reflect(u: &[C64], y: &mut [C64]) {
        let mut s = C64::new(0.0, 0.0);
        for (a, b) in u.iter().zip(y.iter()) {
            s += a.conj() * b;
        }
        let s2 = s * 2.0;
        for (a, b) in u.iter().zip(y.iter_mut()) {
            *b -= a * s2;
        }
    }

    /// `y <- V y`.
    pub fn apply(&self, y: &mut [C64]) {
        for (a, p) in y.iter_mut().zip(&self.phases) {
            *a *= p;
        }
        for (k, u) in self.reflectors.iter().enumerate().rev() {
            Self::reflect(u, &mut y[k..]);
        }
    }

    /// `y <- V^† y`.
    pub fn apply_adjoint(&self, y: &mut [C64]) {
        for (k, u) in self.reflectors.iter().enumerate() {
            Self::reflect(u, &mut y[k..]);
        }
        for (a, p) in y.iter_mut().zip(&self.phases) {
            *a *= p.conj();
        }
    }

    pub fn to_dense(&self) -> DenseOperator {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        let mut col = alloc::vec![C64::new(0.0, 0.0); dim];
        for j in 0..dim {
            col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            col[j] = C64::new(1.0, 0.0);
            self.apply(&mut col);
            m.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        }
        DenseOperator::from_matrix_unchecked(self.n_qubits, m, true)
    }

    /// Cheap identifier of the sample (hash of the phases and first reflector).
    pub fn fingerprint(&self) -> u64 {
        let mut h = super::splitmix64(self.n_qubits as u64);
        let first = self.reflectors.first().map(|v| v.as_slice()).unwrap_or(&[]);
        for z in self.phases.iter().chain(first) {
            h = super::splitmix64(h ^ z.re.to_bits());
            h = super::splitmix64(h ^ z.im.to_bits());
        }
        h
    }
}

/// Haar-random unitary on `n` qubits as a dense operator.
pub fn haar_unitary(n_qubits: usize, rng: &mut RngStream) -> Result<DenseOperator> {
    Ok(HouseholderUnitary::sample(n_qubits, rng)?.to_dense())
}

/// Haar-random pure state: a normalized complex Gaussian vector.
pub fn random_state(n_qubits: usize, rng: &mut RngStream) -> Result<StateVector> {
    check_qubit_cap(n_qubits, MAX_QUBITS)?;
    let amps = (0..1usize << n_qubits).map(|_| complex_gaussian(rng)).collect();
    StateVector::normalized(n_qubits, amps)
}
