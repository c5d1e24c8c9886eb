use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{inner, PauliString, StateVector};
use crate::{check_qubit_cap, Error, Result, C64, MAX_QUBITS};

const HERMITIAN_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

/// Linear operator that can act on raw amplitude vectors.
pub trait Observable {
    fn n_qubits(&self) -> usize;

    /// `out = self * input`; both slices have length `2^n`.
    fn apply_into(&self, input: &[C64], out: &mut [C64]);

    fn is_hermitian(&self) -> bool;

    fn apply(&self, input: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); input.len()];
        self.apply_into(input, &mut out);
        out
    }
}

/// Largest absolute eigenvalue of a Hermitian operator.
pub trait SpectralNorm {
    fn spectral_norm(&self) -> f64;
}

impl Observable for PauliString {
    fn n_qubits(&self) -> usize {
        PauliString::n_qubits(self)
    }

    fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        PauliString::apply_into(self, input, out)
    }

    fn is_hermitian(&self) -> bool {
        true
    }
}

impl SpectralNorm for PauliString {
    fn spectral_norm(&self) -> f64 {
        self.coefficient().abs()
    }
}

/// Sum of Pauli strings on a common register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(terms: Vec<PauliString>) -> Result<Self> {
        let n = terms
            .first()
            .map(|t| t.n_qubits())
            .ok_or_else(|| Error::InvalidInput("empty Pauli sum".into()))?;
        if let Some(t) = terms.iter().find(|t| t.n_qubits() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.n_qubits(),
            });
        }
        Ok(Self { n_qubits: n, terms })
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn to_dense(&self) -> DenseOperator {
        let mut m = DMatrix::<C64>::zeros(1 << self.n_qubits, 1 << self.n_qubits);
        for t in &self.terms {
            m += t.to_dense().matrix();
        }
        DenseOperator::from_matrix_unchecked(self.n_qubits, m, false)
    }
}

impl Observable for PauliSum {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        let mut scratch = vec![C64::new(0.0, 0.0); input.len()];
        for t in &self.terms {
            t.apply_into(input, &mut scratch);
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += s;
            }
        }
    }

    fn is_hermitian(&self) -> bool {
        true
    }
}

impl SpectralNorm for PauliSum {
    fn spectral_norm(&self) -> f64 {
        self.to_dense().spectral_norm()
    }
}

/// Dense `2^n x 2^n` complex operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_qubits: usize,
    matrix: DMatrix<C64>,
    unitary: bool,
}

impl DenseOperator {
    pub fn new(n_qubits: usize, matrix: DMatrix<C64>) -> Result<Self> {
        check_qubit_cap(n_qubits, MAX_QUBITS)?;
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidInput(alloc::format!(
                "expected a {dim}x{dim} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            n_qubits,
            matrix,
            unitary: false,
        })
    }

    /// Wraps a matrix and flags it unitary after checking `M^† M = I`.
    pub fn unitary(n_qubits: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::new(n_qubits, matrix)?;
        if op.unitarity_defect() > UNITARY_TOL {
            return Err(Error::NotUnitary);
        }
        op.unitary = true;
        Ok(op)
    }

    pub(crate) fn from_matrix_unchecked(n_qubits: usize, matrix: DMatrix<C64>, unitary: bool) -> Self {
        Self {
            n_qubits,
            matrix,
            unitary,
        }
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_qubit_cap(n_qubits, MAX_QUBITS)?;
        let dim = 1usize << n_qubits;
        Ok(Self::from_matrix_unchecked(
            n_qubits,
            DMatrix::identity(dim, dim),
            true,
        ))
    }

    pub fn hadamard() -> Self {
        let s = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_matrix_unchecked(1, DMatrix::from_row_slice(2, 2, &[s, s, s, -s]), true)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Largest entrywise deviation of `M^† M` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        let dim = prod.nrows();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> DenseOperator {
        Self::from_matrix_unchecked(self.n_qubits, self.matrix.adjoint(), self.unitary)
    }

    /// `self * other`.
    pub fn compose(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(Self::from_matrix_unchecked(
            self.n_qubits,
            &self.matrix * &other.matrix,
            self.unitary && other.unitary,
        ))
    }

    /// `V^† self V`.
    pub fn conjugate_by(&self, v: &DenseOperator) -> Result<DenseOperator> {
        v.adjoint().compose(self)?.compose(v)
    }

    /// `self ⊗ other` with `self` on the leading qubits.
    pub fn kron(&self, other: &DenseOperator) -> Result<DenseOperator> {
        check_qubit_cap(self.n_qubits + other.n_qubits, MAX_QUBITS)?;
        Ok(Self::from_matrix_unchecked(
            self.n_qubits + other.n_qubits,
            self.matrix.kronecker(&other.matrix),
            self.unitary && other.unitary,
        ))
    }
}

impl Observable for DenseOperator {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = input.iter().enumerate().map(|(j, x)| self.matrix[(i, j)] * x).sum();
        }
    }

    fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL
    }
}

impl SpectralNorm for DenseOperator {
    fn spectral_norm(&self) -> f64 {
        if self.is_hermitian() {
            let (vals, _) = hermitian_eigen(&self.matrix);
            vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        } else {
            let gram = self.matrix.adjoint() * &self.matrix;
            let (vals, _) = hermitian_eigen(&gram);
            vals.iter().fold(0.0f64, |m, v| m.max(*v)).max(0.0).sqrt()
        }
    }
}

/// Applies a unitary [`DenseOperator`] to a state.
pub fn apply_dense(state: &StateVector, u: &DenseOperator) -> Result<StateVector> {
    state.check_same(u.n_qubits())?;
    if !u.is_unitary() {
        return Err(Error::NotUnitary);
    }
    Ok(StateVector::from_raw(
        state.n_qubits(),
        u.apply(state.amplitudes()),
    ))
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// `exp(-i theta H)` for a Hermitian `H` via eigendecomposition.
///
/// This is the slow path for generators that are not Pauli strings.
pub fn expm_hermitian(h: &DenseOperator, theta: f64) -> Result<DenseOperator> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let (vals, vecs) = hermitian_eigen(h.matrix());
    let phases = DVector::from_iterator(
        vals.len(),
        vals.iter().map(|l| {
            let (s, c) = (-theta * l).sin_cos();
            C64::new(c, s)
        }),
    );
    let scaled = DMatrix::from_fn(vecs.nrows(), vecs.ncols(), |r, c| vecs[(r, c)] * phases[c]);
    Ok(DenseOperator::from_matrix_unchecked(
        h.n_qubits(),
        scaled * vecs.adjoint(),
        true,
    ))
}

fn check_operator<O: Observable + ?Sized>(state: &StateVector, h: &O) -> Result<()> {
    state.check_same(h.n_qubits())?;
    if !h.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    Ok(())
}

/// `<psi|H|psi>` for a Hermitian `H`.
pub fn expectation<O: Observable + ?Sized>(state: &StateVector, h: &O) -> Result<f64> {
    check_operator(state, h)?;
    let hv = h.apply(state.amplitudes());
    let raw = inner(state.amplitudes(), &hv);
    debug_assert!(raw.im.abs() < 1e-10 * (1.0 + raw.re.abs()));
    Ok(raw.re)
}

/// `i<psi|[A, B]|psi> = -2 Im <A psi|B psi>` for Hermitian `A`, `B`.
pub fn commutator_expectation<A, B>(state: &StateVector, a: &A, b: &B) -> Result<f64>
where
    A: Observable + ?Sized,
    B: Observable + ?Sized,
{
    check_operator(state, a)?;
    check_operator(state, b)?;
    let av = a.apply(state.amplitudes());
    let bv = b.apply(state.amplitudes());
    Ok(-2.0 * inner(&av, &bv).im)
}

/// `i(<AB> - <BA>)` evaluated literally; cross-check for
/// [`commutator_expectation`].
pub fn commutator_expectation_naive<A, B>(state: &StateVector, a: &A, b: &B) -> Result<f64>
where
    A: Observable + ?Sized,
    B: Observable + ?Sized,
{
    check_operator(state, a)?;
    check_operator(state, b)?;
    let psi = state.amplitudes();
    let ab = a.apply(&b.apply(psi));
    let ba = b.apply(&a.apply(psi));
    let diff = inner(psi, &ab) - inner(psi, &ba);
    Ok((C64::new(0.0, 1.0) * diff).re)
}
