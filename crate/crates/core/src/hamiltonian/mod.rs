//! Problem Hamiltonians `H_p`: diagonal Ising forms built from graphs, the
//! projector `1 - |psi_T><psi_T|` for known targets, and dense Hermitian
//! matrices, each with cached spectral norm and ground energy.

mod graph;

pub use graph::Graph;

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::linalg::{
    hermitian_eigen, inner, qubit_bit, DenseOperator, Observable, SpectralNorm, StateVector,
};
use crate::random::RngStream;
use crate::{check_qubit_cap, Error, Result, C64, MAX_QUBITS};

/// Relative tolerance for counting degenerate ground states.
const DEGENERACY_TOL: f64 = 1e-9;

/// Storage form of a [`ProblemHamiltonian`].
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianForm {
    /// Diagonal in the computational basis.
    IsingDiagonal(Vec<f64>),
    /// `1 - |target><target|`.
    Projector(StateVector),
    Dense(DMatrix<C64>),
}

/// Hermitian cost operator with cached spectral data.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemHamiltonian {
    n_qubits: usize,
    form: HamiltonianForm,
    spectral_norm: f64,
    ground_energy: f64,
    ground_degeneracy: usize,
    /// Eigenvalues and eigenvectors of the dense form, used for shot sampling.
    eigen: Option<(Vec<f64>, DMatrix<C64>)>,
}

/// `H_p = sum_{(i,j)} w_ij Z_i Z_j`, stored as its diagonal.
///
/// The diagonal entry of bitstring `b` is `sum w_ij z_i z_j` with spin
/// `z = +1` for bit 0 and `-1` for bit 1.
pub fn ising_from_graph(g: &Graph) -> Result<ProblemHamiltonian> {
    let n = g.n_vertices();
    check_qubit_cap(n, MAX_QUBITS)?;
    let diag = (0..1usize << n)
        .map(|b| {
            g.edges()
                .iter()
                .map(|&(u, v, w)| {
                    let differ = ((b & qubit_bit(n, u)) != 0) != ((b & qubit_bit(n, v)) != 0);
                    if differ {
                        -w
                    } else {
                        w
                    }
                })
                .sum()
        })
        .collect();
    ProblemHamiltonian::from_diagonal(n, diag)
}

/// `H_p = 1 - |target><target|`.
pub fn projector_hamiltonian(target: &StateVector) -> Result<ProblemHamiltonian> {
    let norm = target.norm();
    if (norm - 1.0).abs() > crate::linalg::NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    Ok(ProblemHamiltonian {
        n_qubits: target.n_qubits(),
        form: HamiltonianForm::Projector(target.clone()),
        spectral_norm: 1.0,
        ground_energy: 0.0,
        ground_degeneracy: 1,
        eigen: None,
    })
}

/// Exact minimum eigenvalue and its multiplicity, computed from scratch:
/// a diagonal scan for the Ising form, full eigendecomposition otherwise.
pub fn ground_energy_bruteforce(h: &ProblemHamiltonian) -> (f64, usize) {
    match &h.form {
        HamiltonianForm::IsingDiagonal(diag) => min_with_multiplicity(diag),
        HamiltonianForm::Projector(_) => (0.0, 1),
        HamiltonianForm::Dense(m) => min_with_multiplicity(&hermitian_eigen(m).0),
    }
}

fn min_with_multiplicity(values: &[f64]) -> (f64, usize) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let count = values
        .iter()
        .filter(|&&v| (v - min).abs() <= DEGENERACY_TOL * scale)
        .count();
    (min, count)
}

/// `alpha = J / E_min`, unclipped.
pub fn approximation_ratio(j: f64, e_min: f64) -> Result<f64> {
    if e_min.abs() < 1e-12 {
        return Err(Error::ZeroGroundEnergy);
    }
    Ok(j / e_min)
}

impl ProblemHamiltonian {
    pub fn from_diagonal(n_qubits: usize, diag: Vec<f64>) -> Result<Self> {
        check_qubit_cap(n_qubits, MAX_QUBITS)?;
        if diag.len() != 1usize << n_qubits {
            return Err(Error::InvalidInput("diagonal length must be 2^n".into()));
        }
        if diag.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidInput("non-finite diagonal entry".into()));
        }
        let (e, deg) = min_with_multiplicity(&diag);
        let norm = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        Ok(Self {
            n_qubits,
            form: HamiltonianForm::IsingDiagonal(diag),
            spectral_norm: norm,
            ground_energy: e,
            ground_degeneracy: deg,
            eigen: None,
        })
    }

    /// Dense Hermitian form; the eigendecomposition is computed once here.
    pub fn from_dense(op: &DenseOperator) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        let (vals, vecs) = hermitian_eigen(op.matrix());
        let (e, deg) = min_with_multiplicity(&vals);
        let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            n_qubits: op.n_qubits(),
            form: HamiltonianForm::Dense(op.matrix().clone()),
            spectral_norm: norm,
            ground_energy: e,
            ground_degeneracy: deg,
            eigen: Some((vals, vecs)),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn form(&self) -> &HamiltonianForm {
        &self.form
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn ground_degeneracy(&self) -> usize {
        self.ground_degeneracy
    }

    pub fn to_dense(&self) -> DenseOperator {
        let dim = 1usize << self.n_qubits;
        let m = match &self.form {
            HamiltonianForm::IsingDiagonal(d) => {
                DMatrix::from_fn(dim, dim, |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) })
            }
            HamiltonianForm::Projector(t) => {
                let a = t.amplitudes();
                DMatrix::from_fn(dim, dim, |i, j| {
                    let id = if i == j { 1.0 } else { 0.0 };
                    C64::new(id, 0.0) - a[i] * a[j].conj()
                })
            }
            HamiltonianForm::Dense(m) => m.clone(),
        };
        DenseOperator::new(self.n_qubits, m).expect("dimensions fixed at construction")
    }

    /// `J(psi) = <psi|H_p|psi>`.
    pub fn energy(&self, state: &StateVector) -> Result<f64> {
        state.check_same(self.n_qubits)?;
        Ok(self.energy_of(state.amplitudes()))
    }

    pub(crate) fn energy_of(&self, amps: &[C64]) -> f64 {
        match &self.form {
            HamiltonianForm::IsingDiagonal(d) => {
                amps.iter().zip(d).map(|(a, e)| a.norm_sqr() * e).sum()
            }
            HamiltonianForm::Projector(t) => {
                let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                norm2 - inner(t.amplitudes(), amps).norm_sqr()
            }
            HamiltonianForm::Dense(_) => inner(amps, &self.apply(amps)).re,
        }
    }

    /// `Var_psi(H_p) = <H_p^2> - <H_p>^2`.
    pub fn variance_of(&self, state: &StateVector) -> Result<f64> {
        state.check_same(self.n_qubits)?;
        let amps = state.amplitudes();
        Ok(match &self.form {
            HamiltonianForm::IsingDiagonal(d) => {
                let (mut m1, mut m2) = (0.0, 0.0);
                for (a, e) in amps.iter().zip(d) {
                    let p = a.norm_sqr();
                    m1 += p * e;
                    m2 += p * e * e;
                }
                m2 - m1 * m1
            }
            HamiltonianForm::Projector(t) => {
                // Eigenvalues 0/1, so Var = p(1 - p) with p = 1 - fidelity.
                let p = 1.0 - inner(t.amplitudes(), amps).norm_sqr();
                p * (1.0 - p)
            }
            HamiltonianForm::Dense(_) => {
                let hv = self.apply(amps);
                let mean = inner(amps, &hv).re;
                hv.iter().map(|a| a.norm_sqr()).sum::<f64>() - mean * mean
            }
        })
    }

    /// Figure of merit: `alpha = J / E_min`, or the fidelity `1 - J` when
    /// the ground energy is zero (projector Hamiltonians).
    pub fn figure_of_merit(&self, j: f64) -> f64 {
        approximation_ratio(j, self.ground_energy).unwrap_or(1.0 - j)
    }

    /// Mean of `shots` projective measurements of `H_p` in `state`.
    pub fn sample_energy(&self, amps: &[C64], shots: u64, rng: &mut RngStream) -> Result<f64> {
        if shots == 0 {
            return Err(Error::InvalidInput("shots must be at least 1".into()));
        }
        match &self.form {
            HamiltonianForm::IsingDiagonal(d) => {
                let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
                Ok(sample_spectrum(&probs, d, shots, rng))
            }
            HamiltonianForm::Projector(t) => {
                let p_excited = (1.0 - inner(t.amplitudes(), amps).norm_sqr()).clamp(0.0, 1.0);
                let hits = Binomial::new(shots, p_excited)
                    .map_err(|e| Error::InvalidInput(alloc::format!("{e}")))?
                    .sample(rng);
                Ok(hits as f64 / shots as f64)
            }
            HamiltonianForm::Dense(_) => {
                let (vals, vecs) = self.eigen.as_ref().expect("dense form caches its eigensystem");
                let probs: Vec<f64> = (0..vals.len())
                    .map(|k| {
                        let mut acc = C64::new(0.0, 0.0);
                        for (i, a) in amps.iter().enumerate() {
                            acc += vecs[(i, k)].conj() * a;
                        }
                        acc.norm_sqr()
                    })
                    .collect();
                Ok(sample_spectrum(&probs, vals, shots, rng))
            }
        }
    }
}

fn sample_spectrum(probs: &[f64], values: &[f64], shots: u64, rng: &mut RngStream) -> f64 {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut sum = 0.0;
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(values.len() - 1);
        sum += values[idx];
    }
    sum / shots as f64
}

impl Observable for ProblemHamiltonian {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        match &self.form {
            HamiltonianForm::IsingDiagonal(d) => {
                for ((o, a), e) in out.iter_mut().zip(input).zip(d) {
                    *o = a * e;
                }
            }
            HamiltonianForm::Projector(t) => {
                let overlap = inner(t.amplitudes(), input);
                for ((o, a), ta) in out.iter_mut().zip(input).zip(t.amplitudes()) {
                    *o = a - ta * overlap;
                }
            }
            HamiltonianForm::Dense(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, a) in input.iter().enumerate() {
                        acc += m[(i, j)] * a;
                    }
                    *o = acc;
                }
            }
        }
    }

    fn is_hermitian(&self) -> bool {
        true
    }
}

impl SpectralNorm for ProblemHamiltonian {
    fn spectral_norm(&self) -> f64 {
        self.spectral_norm
    }
}
