//! Hybrid quantum generator coordinate method (QuGCM) on an exact
//! statevector simulator.
//!
//! The toolkit assembles discretized Hill-Wheeler kernel matrices
//! `H[p][q] = <Phi(Z_p)|H|Phi(Z_q)>` and `S[p][q] = <Phi(Z_p)|Phi(Z_q)>`
//! from products of Thouless exponentials acting on a Hartree-Fock
//! reference, then solves the non-orthogonal eigenproblem `H f = E S f`
//! for ground- and excited-state energies.
//!
//! The crate is organized around a symplectic Pauli-string algebra:
//! Hamiltonians, generators and their exponentials are all carried as
//! linear combinations of Pauli strings, so every kernel entry reduces to
//! expectations `<Phi|P|Phi>` of single strings against a fixed reference
//! state. Finite measurement budgets are modeled by Gaussian perturbation
//! at the max-covariance bound.
//!
//! Modules:
//! - [`pauli`]: Pauli strings, canonical sums, commutation, QWC grouping.
//! - [`fermion`]: second quantization, Jordan-Wigner mapping, Hamiltonian
//!   construction from integral files.
//! - [`fcidump`]: FCIDUMP reader.
//! - [`expgen`]: exact and Suzuki-Trotter exponentials of anti-Hermitian
//!   Pauli sums.
//! - [`simulator`]: dense statevector expectations, expectation cache, and
//!   the finite-shot noise model.
//! - [`gcm`]: sampling schemes (including the built-in H4 scheme) and
//!   kernel assembly.
//! - [`eigensolver`]: generalized eigenproblem via canonical
//!   orthogonalization, plus the sector-restricted FCI oracle.
//! - [`dilation`]: classical verification of the linear-system-inspired
//!   block-encoding embedding.

pub mod dilation;
pub mod eigensolver;
pub mod expgen;
pub mod fcidump;
pub mod fermion;
pub mod gcm;
pub mod pauli;
pub mod simulator;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("qubit count {0} exceeds the supported maximum of 64")]
    TooManyQubits(usize),
    #[error("index {index} out of range for {n_modes} modes")]
    IndexOutOfRange { index: usize, n_modes: usize },
    #[error("{0}")]
    Validation(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
pub(crate) mod testkit {
    //! Dense Kronecker oracles for tests. Everything here is built from
    //! 2x2 matrices and explicit Kronecker products, independent of the
    //! mask-based fast paths it is used to check.

    use nalgebra::DMatrix;
    use num_complex::Complex64;

    pub fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn single(ch: char) -> DMatrix<Complex64> {
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        match ch {
            'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
            'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            'Y' => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
            'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
            _ => panic!("not a Pauli label: {ch}"),
        }
    }

    /// Dense matrix of a label such as "XZY", qubit 0 leftmost and least
    /// significant in the basis index.
    pub fn dense_from_label(label: &str) -> DMatrix<Complex64> {
        let mut acc = DMatrix::from_element(1, 1, c(1.0, 0.0));
        for ch in label.chars() {
            acc = single(ch).kronecker(&acc);
        }
        acc
    }

    /// Dense matrix exponential of a Hermitian matrix times i*t, via
    /// eigendecomposition: e^{i t A} = V diag(e^{i t w}) V^dag.
    pub fn expm_i_hermitian(a: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
        let eig = a.clone().symmetric_eigen();
        let n = a.nrows();
        let mut d = DMatrix::zeros(n, n);
        for k in 0..n {
            d[(k, k)] = (Complex64::i() * t * eig.eigenvalues[k]).exp();
        }
        &eig.eigenvectors * d * eig.eigenvectors.adjoint()
    }

    pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
