use alloc::vec;
use alloc::vec::Vec;

use super::{inner, norm_sqr, NORM_TOL};
use crate::{check_qubit_cap, Error, Result, C64, MAX_QUBITS};

/// Normalized pure state of `n` qubits stored as `2^n` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_cap(n_qubits, MAX_QUBITS)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidInput(alloc::format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Builds a state from a label over `{0, 1, +, -}`, qubit 0 first.
    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.chars().count();
        check_qubit_cap(n, MAX_QUBITS)?;
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for ch in label.chars() {
            let (a0, a1) = match ch {
                '0' => (1.0, 0.0),
                '1' => (0.0, 1.0),
                '+' => (s, s),
                '-' => (s, -s),
                other => {
                    return Err(Error::InvalidInput(alloc::format!(
                        "unknown state label character {other:?}"
                    )))
                }
            };
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(a * a0);
                next.push(a * a1);
            }
            amps = next;
        }
        Ok(Self { n_qubits: n, amps })
    }

    /// Wraps amplitudes, checking length and normalization.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_qubit_cap(n_qubits, MAX_QUBITS)?;
        if amps.len() != 1usize << n_qubits {
            return Err(Error::InvalidInput(alloc::format!(
                "expected {} amplitudes, got {}",
                1usize << n_qubits,
                amps.len()
            )));
        }
        let norm = norm_sqr(&amps).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Normalizes `amps` before wrapping them.
    pub fn normalized(n_qubits: usize, mut amps: Vec<C64>) -> Result<Self> {
        let norm = norm_sqr(&amps).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(n_qubits, amps)
    }

    /// Wraps amplitudes known to be normalized (results of unitary maps).
    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1usize << n_qubits);
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same(other.n_qubits)?;
        Ok(inner(&self.amps, &other.amps))
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `self ⊗ other` with `self` on the leading qubits.
    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        check_qubit_cap(self.n_qubits + other.n_qubits, MAX_QUBITS)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self::from_raw(self.n_qubits + other.n_qubits, amps))
    }

    pub(crate) fn check_same(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: n,
            });
        }
        Ok(())
    }
}
