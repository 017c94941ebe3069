//! Generalized eigenproblem `H f = E S f` via canonical orthogonalization,
//! and the sector-restricted dense FCI oracle.
//!
//! The overlap matrix of a discretized coordinate grid is routinely
//! near-singular (all basis states collapse onto the reference as t -> 0),
//! so S is eigendecomposed first and modes below a relative threshold are
//! discarded before the projected ordinary eigenproblem is solved.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pauli::PauliSum;
use crate::{Error, Result};

pub const HARTREE_TO_EV: f64 = 27.211386245988;
/// Chemical-accuracy band in milliHartree.
pub const CHEMICAL_ACCURACY_MHA: f64 = 1.5936;

/// Solution of the non-orthogonal eigenproblem restricted to the retained
/// overlap subspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenSolution {
    /// Ascending retained eigenvalues (Hartree).
    pub eigenvalues: Vec<f64>,
    /// Eigenvector columns in the original M-dimensional basis, flattened
    /// column-major (M rows, retained_dim columns), as [re, im] pairs.
    pub eigenvectors_re: Vec<f64>,
    pub eigenvectors_im: Vec<f64>,
    pub retained_dim: usize,
    pub basis_dim: usize,
    /// Ascending eigenvalues of S.
    pub s_spectrum: Vec<f64>,
    /// Relative overlap threshold used.
    pub tau: f64,
    /// Residuals ||H f_k - E_k S f_k|| per retained mode.
    pub residuals: Vec<f64>,
}

impl EigenSolution {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn eigenvector(&self, k: usize) -> DVector<Complex64> {
        let m = self.basis_dim;
        DVector::from_fn(m, |i, _| {
            Complex64::new(
                self.eigenvectors_re[k * m + i],
                self.eigenvectors_im[k * m + i],
            )
        })
    }
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Solves `H f = E S f` by canonical orthogonalization: eigendecompose S,
/// discard eigenpairs below `tau * max(S eigenvalue)`, project H into the
/// retained orthonormalized subspace, solve the ordinary Hermitian
/// problem there and map the vectors back.
pub fn solve_generalized(
    h: &DMatrix<Complex64>,
    s: &DMatrix<Complex64>,
    tau: f64,
) -> Result<EigenSolution> {
    let m = h.nrows();
    if h.ncols() != m || s.nrows() != m || s.ncols() != m {
        return Err(Error::validation("kernel matrices must be square and equal-sized"));
    }
    if tau < 0.0 {
        return Err(Error::validation("threshold must be non-negative"));
    }
    let scale_h = h.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if hermiticity_defect(h) > 1e-8 * scale_h || hermiticity_defect(s) > 1e-8 {
        return Err(Error::validation("kernel matrices are not Hermitian within tolerance"));
    }

    let s_eig = s.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        s_eig.eigenvalues[a]
            .partial_cmp(&s_eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let s_spectrum: Vec<f64> = order.iter().map(|&i| s_eig.eigenvalues[i]).collect();
    let smax = *s_spectrum.last().expect("non-empty spectrum");
    if smax <= 0.0 {
        return Err(Error::validation("overlap matrix has no positive eigenvalues"));
    }
    // Positivity is required on top of the relative threshold: a zero or
    // negative rounding mode cannot be orthonormalized.
    let retained: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| s_eig.eigenvalues[i] > 0.0 && s_eig.eigenvalues[i] >= tau * smax)
        .collect();
    if retained.is_empty() {
        return Err(Error::validation(format!(
            "all overlap eigenvalues fall below the threshold {tau} * {smax}"
        )));
    }
    let r = retained.len();
    let mut x = DMatrix::zeros(m, r);
    for (col, &i) in retained.iter().enumerate() {
        let scale = Complex64::new(1.0 / s_eig.eigenvalues[i].sqrt(), 0.0);
        x.set_column(col, &(s_eig.eigenvectors.column(i) * scale));
    }
    let mut projected = x.adjoint() * h * &x;
    let sym = (&projected + projected.adjoint()) * Complex64::new(0.5, 0.0);
    projected = sym;
    let p_eig = projected.symmetric_eigen();
    let mut p_order: Vec<usize> = (0..r).collect();
    p_order.sort_by(|&a, &b| {
        p_eig.eigenvalues[a]
            .partial_cmp(&p_eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<f64> = p_order.iter().map(|&i| p_eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(m, r);
    for (col, &i) in p_order.iter().enumerate() {
        vectors.set_column(col, &(&x * p_eig.eigenvectors.column(i)));
    }
    let residuals: Vec<f64> = (0..r)
        .map(|k| {
            let f = vectors.column(k);
            (h * f - s * f * Complex64::new(eigenvalues[k], 0.0)).norm()
        })
        .collect();
    Ok(EigenSolution {
        eigenvalues,
        eigenvectors_re: vectors.iter().map(|v| v.re).collect(),
        eigenvectors_im: vectors.iter().map(|v| v.im).collect(),
        retained_dim: r,
        basis_dim: m,
        s_spectrum,
        tau,
        residuals,
    })
}

/// S_z sector selector: doubled spin projection plus the bitmask of
/// alpha modes under the crate's mode ordering.
#[derive(Debug, Clone, Copy)]
pub struct SzFilter {
    pub two_sz: i64,
    pub alpha_modes: u64,
}

fn two_sz_of(bits: u64, alpha: u64) -> i64 {
    (bits & alpha).count_ones() as i64 - (bits & !alpha).count_ones() as i64
}

/// Brute-force reference spectrum: builds the dense 2^n Hamiltonian,
/// restricts it to the basis states with the given particle count (and
/// optionally S_z), and diagonalizes the sector.
pub fn fci_oracle(
    hamiltonian: &PauliSum,
    n_particles: usize,
    sz: Option<SzFilter>,
) -> Result<Vec<f64>> {
    let n = hamiltonian.n_qubits();
    if n > 16 {
        return Err(Error::TooManyQubits(n));
    }
    let dense = hamiltonian.to_dense();
    let dim = dense.nrows();
    let scale = dense.iter().map(|v| v.norm()).fold(1.0, f64::max);

    // Number (and S_z) operators are diagonal in the computational basis,
    // so commutation reduces to a sparsity pattern check.
    for a in 0..dim {
        for b in 0..dim {
            let v = dense[(a, b)].norm();
            if v <= 1e-10 * scale {
                continue;
            }
            if (a as u64).count_ones() != (b as u64).count_ones() {
                return Err(Error::validation(
                    "Hamiltonian does not commute with the number operator",
                ));
            }
            if let Some(f) = sz {
                if two_sz_of(a as u64, f.alpha_modes) != two_sz_of(b as u64, f.alpha_modes) {
                    return Err(Error::validation(
                        "Hamiltonian does not conserve S_z under the given alpha labeling",
                    ));
                }
            }
        }
    }

    let sector: Vec<usize> = (0..dim)
        .filter(|&b| {
            (b as u64).count_ones() as usize == n_particles
                && sz.is_none_or(|f| two_sz_of(b as u64, f.alpha_modes) == f.two_sz)
        })
        .collect();
    if sector.is_empty() {
        return Err(Error::validation(format!(
            "no basis states with {n_particles} particles in the requested sector"
        )));
    }
    let sub = DMatrix::from_fn(sector.len(), sector.len(), |i, j| {
        dense[(sector[i], sector[j])]
    });
    let eig = sub.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(vals)
}

/// Ground and excitation energies with positional deltas against a
/// reference spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ground energy (Hartree).
    pub ground_energy: f64,
    /// Excitation energies `omega_k = (E_k - E_0) * Hartree->eV`, up to
    /// three.
    pub excitations_ev: Vec<f64>,
    /// Ground-state delta vs the reference, in milliHartree.
    pub ground_delta_mha: Option<f64>,
    /// Positional excitation deltas vs the reference, in eV.
    pub excitation_deltas_ev: Vec<f64>,
}

/// Builds the report from a solution and an optional reference spectrum
/// (ascending Hartree values, e.g. from [`fci_oracle`]).
pub fn spectrum_report(sol: &EigenSolution, reference: Option<&[f64]>) -> SpectrumReport {
    let e0 = sol.ground_energy();
    let excitations_ev: Vec<f64> = sol
        .eigenvalues
        .iter()
        .skip(1)
        .take(3)
        .map(|e| (e - e0) * HARTREE_TO_EV)
        .collect();
    let mut ground_delta_mha = None;
    let mut excitation_deltas_ev = Vec::new();
    if let Some(r) = reference {
        if let Some(&r0) = r.first() {
            ground_delta_mha = Some((e0 - r0) * 1e3);
            for (k, w) in excitations_ev.iter().enumerate() {
                if let Some(&rk) = r.get(k + 1) {
                    excitation_deltas_ev.push(w - (rk - r0) * HARTREE_TO_EV);
                }
            }
        }
    }
    SpectrumReport {
        ground_energy: e0,
        excitations_ev,
        ground_delta_mha,
        excitation_deltas_ev,
    }
}
