use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{qubit_bit, DenseOperator, StateVector};
use crate::{check_qubit_cap, Error, Result, C64, MAX_QUBITS};

/// Single-qubit Pauli factor. The derived order `I < X < Y < Z` is the
/// lexicographic order used for pool construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_digit(d: usize) -> Pauli {
        match d & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }
}

/// Real multiple of a tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    factors: Vec<Pauli>,
    coefficient: f64,
}

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Result<Self> {
        Self::with_coefficient(factors, 1.0)
    }

    pub fn with_coefficient(factors: Vec<Pauli>, coefficient: f64) -> Result<Self> {
        check_qubit_cap(factors.len(), MAX_QUBITS)?;
        if !coefficient.is_finite() {
            return Err(Error::InvalidInput("non-finite Pauli coefficient".into()));
        }
        Ok(Self {
            factors,
            coefficient,
        })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::new(vec![Pauli::I; n_qubits])
    }

    /// `p` on qubit `q`, identity elsewhere.
    pub fn single(n_qubits: usize, q: usize, p: Pauli) -> Result<Self> {
        if q >= n_qubits {
            return Err(Error::InvalidQubitSet(alloc::format!(
                "qubit {q} out of range for {n_qubits} qubits"
            )));
        }
        let mut factors = vec![Pauli::I; n_qubits];
        factors[q] = p;
        Self::new(factors)
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.factors.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// `Tr(P) = 0` unless every factor is `I`.
    pub fn trace(&self) -> f64 {
        if self.is_identity() {
            self.coefficient * (1u64 << self.n_qubits()) as f64
        } else {
            0.0
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let clashes = self
            .factors
            .iter()
            .zip(&other.factors)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        clashes % 2 == 0
    }

    fn masks(&self) -> (usize, usize, u32) {
        let n = self.n_qubits();
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
        for (q, p) in self.factors.iter().enumerate() {
            let bit = qubit_bit(n, q);
            match p {
                Pauli::I => {}
                Pauli::X => x |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
                Pauli::Z => z |= bit,
            }
        }
        (x, z, ny)
    }

    /// `out = P * input` over raw amplitudes of matching length.
    pub fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        let (x, z, ny) = self.masks();
        // Y = i X Z, so P|b> = c * i^ny * (-1)^{|b & z|} |b ^ x>.
        let base = match ny % 4 {
            0 => C64::new(self.coefficient, 0.0),
            1 => C64::new(0.0, self.coefficient),
            2 => C64::new(-self.coefficient, 0.0),
            _ => C64::new(0.0, -self.coefficient),
        };
        for (b, a) in input.iter().enumerate() {
            let v = base * a;
            out[b ^ x] = if (b & z).count_ones() % 2 == 1 { -v } else { v };
        }
    }

    pub fn to_dense(&self) -> DenseOperator {
        let dim = 1usize << self.n_qubits();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        let mut col = vec![C64::new(0.0, 0.0); dim];
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for j in 0..dim {
            col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            col[j] = C64::new(1.0, 0.0);
            self.apply_into(&col, &mut out);
            for i in 0..dim {
                m[(i, j)] = out[i];
            }
        }
        DenseOperator::from_matrix_unchecked(self.n_qubits(), m, false)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficient != 1.0 {
            write!(f, "{}*", self.coefficient)?;
        }
        for p in &self.factors {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses a letter string such as `XIZ` (qubit 0 first).
    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .trim()
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidInput(alloc::format!(
                    "unknown Pauli symbol {other:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(factors)
    }
}

impl From<&PauliString> for String {
    fn from(p: &PauliString) -> String {
        alloc::format!("{p}")
    }
}

/// `exp(-i theta P)|state> = cos(theta)|state> - i sin(theta) P|state>`.
///
/// Requires `P` to carry coefficient 1 so that `P^2 = I`.
pub fn apply_pauli_rotation(state: &StateVector, p: &PauliString, theta: f64) -> Result<StateVector> {
    state.check_same(p.n_qubits())?;
    if p.coefficient() != 1.0 {
        return Err(Error::InvalidInput(
            "rotation generator must have coefficient 1".into(),
        ));
    }
    let mut rotated = vec![C64::new(0.0, 0.0); state.dim()];
    p.apply_into(state.amplitudes(), &mut rotated);
    let (s, c) = theta.sin_cos();
    let minus_i_s = C64::new(0.0, -s);
    for (r, a) in rotated.iter_mut().zip(state.amplitudes()) {
        *r = a * c + *r * minus_i_s;
    }
    Ok(StateVector::from_raw(state.n_qubits(), rotated))
}

/// Every non-identity Pauli string on `n` qubits, ordered by ascending
/// weight and lexicographically (`I < X < Y < Z`, qubit 0 first) within a
/// weight class. Cutting this list at a prefix gives the weight-graded pools.
pub fn weight_graded_pool(n_qubits: usize) -> Result<Vec<PauliString>> {
    check_qubit_cap(n_qubits, MAX_QUBITS)?;
    let total = 1usize << (2 * n_qubits);
    let mut pool: Vec<PauliString> = (1..total)
        .map(|code| {
            let factors = (0..n_qubits)
                .map(|q| Pauli::from_digit(code >> (2 * (n_qubits - 1 - q))))
                .collect();
            PauliString {
                factors,
                coefficient: 1.0,
            }
        })
        .collect();
    // Stable sort keeps the lexicographic order of `code` within each weight.
    pool.sort_by_key(|p| p.weight());
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn rotation_at_zero_is_identity() {
        let zero = StateVector::zero(1).unwrap();
        let out = apply_pauli_rotation(&zero, &ps("Z"), 0.0).unwrap();
        assert_eq!(out, zero);
    }

    #[test]
    fn x_rotation_by_half_pi_gives_minus_i_one() {
        let zero = StateVector::zero(1).unwrap();
        let out = apply_pauli_rotation(&zero, &ps("X"), core::f64::consts::FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes()[1].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes()[1].im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn y_rotation_of_plus_state() {
        // exp(iθY) Z exp(-iθY) = cos2θ Z - sin2θ X, so <Z> = -sin(1) at θ = 1/2.
        let plus = StateVector::from_label("+").unwrap();
        let out = apply_pauli_rotation(&plus, &ps("Y"), 0.5).unwrap();
        let p = out.probabilities();
        assert_abs_diff_eq!(p[0] - p[1], -(1.0f64).sin(), epsilon = 1e-12);
    }

    #[test]
    fn rotation_checks_dimensions_and_coefficient() {
        let zero = StateVector::zero(2).unwrap();
        assert!(matches!(
            apply_pauli_rotation(&zero, &ps("X"), 0.1),
            Err(Error::DimensionMismatch { .. })
        ));
        let scaled = PauliString::with_coefficient(vec![Pauli::X, Pauli::I], 2.0).unwrap();
        assert!(apply_pauli_rotation(&zero, &scaled, 0.1).is_err());
    }

    #[test]
    fn y_action_on_basis() {
        let mut out = [C64::new(0.0, 0.0); 2];
        ps("Y").apply_into(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &mut out);
        assert_eq!(out[1], C64::new(0.0, 1.0));
        ps("Y").apply_into(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)], &mut out);
        assert_eq!(out[0], C64::new(0.0, -1.0));
    }

    #[test]
    fn squares_to_coefficient_squared_identity() {
        let p = PauliString::with_coefficient(vec![Pauli::Y, Pauli::Z, Pauli::X], -1.5).unwrap();
        let d = p.to_dense();
        let sq = d.matrix() * d.matrix();
        for i in 0..8 {
            for j in 0..8 {
                let expected = if i == j { 2.25 } else { 0.0 };
                assert_abs_diff_eq!(sq[(i, j)].re, expected, epsilon = 1e-14);
                assert_abs_diff_eq!(sq[(i, j)].im, 0.0, epsilon = 1e-14);
            }
        }
        assert_eq!(p.trace(), 0.0);
    }

    #[test]
    fn pool_ordering_and_size() {
        let pool = weight_graded_pool(2).unwrap();
        assert_eq!(pool.len(), 15);
        let labels: Vec<String> = pool.iter().map(String::from).collect();
        assert_eq!(&labels[..6], &["IX", "IY", "IZ", "XI", "YI", "ZI"]);
        assert_eq!(labels[6], "XX");
        assert_eq!(labels[14], "ZZ");
    }

    #[test]
    fn commutation() {
        assert!(!ps("X").commutes_with(&ps("Z")));
        assert!(ps("XX").commutes_with(&ps("ZZ")));
        assert!(ps("XI").commutes_with(&ps("IZ")));
    }
}
