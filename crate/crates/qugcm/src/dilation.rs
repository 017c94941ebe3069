//! Classical matrix-level verification of the linear-system-inspired
//! embedding: block encoding of S^-1, the enlarged Hamiltonian J, the
//! Hermitian anti-diagonal embedding K (assembled directly and as a
//! linear combination of unitaries), and the query-cost model.
//!
//! No circuits are constructed; every object is a dense matrix checked
//! against dense linear-algebra oracles.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensolver::EigenSolution;
use crate::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Spectral data of a Hermitian matrix, reused for inverses and square
/// roots.
fn hermitian_eig(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn herm_function(
    vals: &[f64],
    vecs: &DMatrix<Complex64>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<Complex64> {
    let n = vals.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = Complex64::new(f(vals[i]), 0.0);
    }
    vecs * d * vecs.adjoint()
}

/// The embedding instance: S, H, the 2M x 2M unitary U with top-left
/// block S^-1 / ||S^-1||, the enlarged J = diag(H / alpha, 0), the 4M x 4M
/// anti-diagonal K, and the norms entering the cost model.
#[derive(Debug, Clone)]
pub struct DilationProblem {
    m: usize,
    s: DMatrix<Complex64>,
    h: DMatrix<Complex64>,
    u: DMatrix<Complex64>,
    j: DMatrix<Complex64>,
    k: DMatrix<Complex64>,
    alpha: f64,
    s_norm: f64,
    s_inv_norm: f64,
}

impl DilationProblem {
    pub fn size(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> &DMatrix<Complex64> {
        &self.s
    }

    pub fn h(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    pub fn u(&self) -> &DMatrix<Complex64> {
        &self.u
    }

    pub fn j(&self) -> &DMatrix<Complex64> {
        &self.j
    }

    pub fn k(&self) -> &DMatrix<Complex64> {
        &self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s_norm(&self) -> f64 {
        self.s_norm
    }

    pub fn s_inv_norm(&self) -> f64 {
        self.s_inv_norm
    }

    /// Coefficient 1-norm of the four-term LCU decomposition of K, which
    /// is twice the Hamiltonian 1-norm.
    pub fn lcu_coefficient_sum(&self) -> f64 {
        2.0 * self.alpha
    }
}

/// Maximum allowed condition number of S before the embedding is refused.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;

/// Completes `A = S^-1 / ||S^-1||` (spectral norm) to the standard unitary
/// dilation `[[A, sqrt(I - A A^dag)], [sqrt(I - A^dag A), -A^dag]]`.
pub fn build_block_encoding(s: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let m = s.nrows();
    if s.ncols() != m || m == 0 {
        return Err(Error::validation("overlap matrix must be square"));
    }
    if (s - s.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max) > 1e-10 {
        return Err(Error::validation("overlap matrix is not Hermitian"));
    }
    let (vals, vecs) = hermitian_eig(s);
    let min_abs = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let max_abs = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if min_abs == 0.0 || max_abs / min_abs > MAX_CONDITION_NUMBER {
        return Err(Error::validation(format!(
            "overlap matrix is singular or too ill-conditioned (cond = {:.3e})",
            if min_abs == 0.0 { f64::INFINITY } else { max_abs / min_abs }
        )));
    }
    let s_inv_norm = 1.0 / min_abs;
    let a = herm_function(&vals, &vecs, |v| 1.0 / (v * s_inv_norm));
    // A is Hermitian, so both off-diagonal blocks are sqrt(I - A^2);
    // rounding can push eigenvalues of A^2 above 1, hence the clamp.
    let (avals, avecs) = hermitian_eig(&a);
    let b = herm_function(&avals, &avecs, |v| (1.0 - v * v).max(0.0).sqrt());
    let mut u = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for jj in 0..m {
            u[(i, jj)] = a[(i, jj)];
            u[(i, m + jj)] = b[(i, jj)];
            u[(m + i, jj)] = b[(i, jj)];
            u[(m + i, m + jj)] = -a[(jj, i)].conj();
        }
    }
    let gram = u.adjoint() * &u;
    let defect = (&gram - DMatrix::identity(2 * m, 2 * m))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::validation(format!(
            "unitary completion failed: ||U^dag U - I|| = {defect:.3e}"
        )));
    }
    Ok(u)
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Assembles the full embedding. K is built both directly as the
/// anti-diagonal block matrix and through its four-term LCU expansion;
/// the two constructions must agree to 1e-12.
pub fn build_embedding(
    h: &DMatrix<Complex64>,
    s: &DMatrix<Complex64>,
    alpha: f64,
) -> Result<DilationProblem> {
    let m = h.nrows();
    if h.ncols() != m || s.nrows() != m || s.ncols() != m {
        return Err(Error::validation("kernel matrices must be square and equal-sized"));
    }
    if alpha <= 0.0 {
        return Err(Error::validation("alpha must be positive"));
    }
    let u = build_block_encoding(s)?;
    let (vals, _) = hermitian_eig(s);
    let min_abs = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let max_abs = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);

    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for jj in 0..m {
            j[(i, jj)] = h[(i, jj)] / Complex64::new(alpha, 0.0);
        }
    }
    let mut p = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        p[(i, i)] = ONE;
    }
    let b = &p * &u * &j * &p;
    let bd = b.adjoint();

    // direct anti-diagonal assembly
    let mut k_direct = DMatrix::zeros(4 * m, 4 * m);
    for i in 0..2 * m {
        for jj in 0..2 * m {
            k_direct[(i, 2 * m + jj)] = b[(i, jj)];
            k_direct[(2 * m + i, jj)] = bd[(i, jj)];
        }
    }

    // LCU assembly: K = (X o B + iY o B + X o B^dag - iY o B^dag) / 2
    let x = DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let iy = DMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
    let k_lcu = (kron(&x, &b) + kron(&iy, &b) + kron(&x, &bd) - kron(&iy, &bd))
        * Complex64::new(0.5, 0.0);

    let disagreement = (&k_direct - &k_lcu)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if disagreement > 1e-12 {
        return Err(Error::validation(format!(
            "direct and LCU assemblies of K disagree by {disagreement:.3e}"
        )));
    }

    Ok(DilationProblem {
        m,
        s: s.clone(),
        h: h.clone(),
        u,
        j,
        k: k_direct,
        alpha,
        s_norm: max_abs,
        s_inv_norm: 1.0 / min_abs,
    })
}

/// Per-eigenvalue outcome of the spectral check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenvalueMatch {
    /// Generalized eigenvalue E (Hartree).
    pub eigenvalue: f64,
    /// Scaled target `E / (||S^-1|| alpha)`.
    pub scaled: f64,
    /// Distance from `+scaled` to the nearest eigenvalue of K.
    pub delta_plus: f64,
    /// Distance from `-scaled` to the nearest eigenvalue of K.
    pub delta_minus: f64,
    /// Residual of `Tr(K^2 h h^dag) = (E / (||S^-1|| alpha))^2` for the
    /// embedded vector `h = [0, f, 0, 0]` with f normalized.
    pub trace_residual: f64,
}

/// Verification report of the embedding against a reference solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DilationReport {
    /// Set when the check was skipped (ill-conditioned S), with the
    /// diagnostic.
    pub skipped: Option<String>,
    pub matches: Vec<EigenvalueMatch>,
    pub alpha: f64,
    pub s_norm: f64,
    pub s_inv_norm: f64,
    pub lcu_coefficient_sum: f64,
    /// Query-cost expression `alpha ||S|| ||S^-1||^2 / epsilon`.
    pub query_cost: f64,
    pub epsilon: f64,
}

/// For each generalized eigenvalue E of the reference, locates
/// `+-E / (||S^-1|| alpha)` in the spectrum of K, reports the trace
/// identity residual for its embedded eigenvector, and evaluates the
/// query-cost model at `epsilon`.
pub fn verify_spectral_property(
    dp: &DilationProblem,
    reference: &EigenSolution,
    epsilon: f64,
) -> Result<DilationReport> {
    if epsilon <= 0.0 {
        return Err(Error::validation("epsilon must be positive"));
    }
    let base = DilationReport {
        skipped: None,
        matches: Vec::new(),
        alpha: dp.alpha,
        s_norm: dp.s_norm,
        s_inv_norm: dp.s_inv_norm,
        lcu_coefficient_sum: dp.lcu_coefficient_sum(),
        query_cost: dp.alpha * dp.s_norm * dp.s_inv_norm.powi(2) / epsilon,
        epsilon,
    };
    if dp.s_norm * dp.s_inv_norm > MAX_CONDITION_NUMBER {
        return Ok(DilationReport {
            skipped: Some(format!(
                "overlap condition number {:.3e} exceeds {MAX_CONDITION_NUMBER:.1e}",
                dp.s_norm * dp.s_inv_norm
            )),
            ..base
        });
    }
    if reference.basis_dim != dp.m {
        return Err(Error::DimensionMismatch {
            left: dp.m,
            right: reference.basis_dim,
        });
    }
    let (k_vals, _) = hermitian_eig(&dp.k);
    let scale = 1.0 / (dp.s_inv_norm * dp.alpha);
    let mut matches = Vec::with_capacity(reference.eigenvalues.len());
    for (idx, &e) in reference.eigenvalues.iter().enumerate() {
        let lambda = e * scale;
        let delta_plus = k_vals
            .iter()
            .map(|v| (v - lambda).abs())
            .fold(f64::INFINITY, f64::min);
        let delta_minus = k_vals
            .iter()
            .map(|v| (v + lambda).abs())
            .fold(f64::INFINITY, f64::min);

        let f = reference.eigenvector(idx);
        let norm = f.norm();
        let mut h_vec = nalgebra::DVector::<Complex64>::zeros(4 * dp.m);
        for i in 0..dp.m {
            h_vec[2 * dp.m + i] = f[i] / Complex64::new(norm, 0.0);
        }
        let kh = &dp.k * &h_vec;
        let trace_residual = (kh.norm_squared() - lambda * lambda).abs();
        matches.push(EigenvalueMatch {
            eigenvalue: e,
            scaled: lambda,
            delta_plus,
            delta_minus,
            trace_residual,
        });
    }
    Ok(DilationReport { matches, ..base })
}

/// Probability that the Hadamard-test control qubit reads 0 given the real
/// part of the overlap between the two basis states.
pub fn hadamard_zero_probability(re_overlap: f64) -> f64 {
    (1.0 + re_overlap) / 2.0
}
