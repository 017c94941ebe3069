//! Second-quantized operators, U(N) generators and the Jordan-Wigner
//! mapping.
//!
//! Mode `p` maps to qubit `p`; a creation operator picks up a Z chain on
//! all modes below it, so occupation numbers live in the computational
//! basis (bit `p` set iff mode `p` occupied) and the anticommutation
//! relations hold exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::pauli::{PauliString, PauliSum, DEFAULT_PRUNE_TOL};
use crate::simulator::StateVector;
use crate::{Error, Result};

/// One ladder operator in a product: `a_mode` or `a_mode^dag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderOp {
    pub mode: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        LadderOp { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        LadderOp { mode, dagger: false }
    }
}

/// A complex linear combination of ladder-operator products. The empty
/// product is the scalar identity term.
#[derive(Debug, Clone, Default)]
pub struct FermionOperator {
    terms: Vec<(Complex64, Vec<LadderOp>)>,
}

impl FermionOperator {
    pub fn new() -> Self {
        FermionOperator { terms: Vec::new() }
    }

    pub fn add_term(&mut self, coeff: Complex64, ops: Vec<LadderOp>) {
        self.terms.push((coeff, ops));
    }

    pub fn terms(&self) -> &[(Complex64, Vec<LadderOp>)] {
        &self.terms
    }

    /// Largest mode index appearing in any term, if non-scalar.
    pub fn max_mode(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|(_, ops)| ops.iter().map(|op| op.mode))
            .max()
    }

    /// `coeff * (a_p^dag a_q - a_q^dag a_p)`, the anti-Hermitian single
    /// excitation.
    pub fn excitation(p: usize, q: usize, coeff: f64) -> Self {
        let c = Complex64::new(coeff, 0.0);
        let mut f = FermionOperator::new();
        f.add_term(c, vec![LadderOp::create(p), LadderOp::annihilate(q)]);
        f.add_term(-c, vec![LadderOp::create(q), LadderOp::annihilate(p)]);
        f
    }

    /// Total number operator `sum_p a_p^dag a_p` on `n_modes` modes.
    pub fn number_operator(n_modes: usize) -> Self {
        let mut f = FermionOperator::new();
        for p in 0..n_modes {
            f.add_term(
                Complex64::new(1.0, 0.0),
                vec![LadderOp::create(p), LadderOp::annihilate(p)],
            );
        }
        f
    }
}

/// Jordan-Wigner image of one ladder operator as a two-term sum:
/// `a_p^(dag) = (prod_{q<p} Z_q) (X_p -+ i Y_p) / 2`.
fn ladder_sum(op: LadderOp, n_qubits: usize) -> PauliSum {
    let chain = (1u64 << op.mode) - 1;
    let xbit = 1u64 << op.mode;
    let x_term = PauliString::new(n_qubits, xbit, chain, 0).expect("mode checked by caller");
    let y_term = PauliString::new(n_qubits, xbit, chain | xbit, 0).expect("mode checked by caller");
    let half = Complex64::new(0.5, 0.0);
    let img = Complex64::new(0.0, if op.dagger { -0.5 } else { 0.5 });
    PauliSum::from_terms(n_qubits, [(half, x_term), (img, y_term)], 0.0)
        .expect("two valid terms")
}

/// Jordan-Wigner transformation of a fermion operator onto `n_qubits`
/// qubits; the output is canonical.
pub fn jordan_wigner(f: &FermionOperator, n_qubits: usize) -> Result<PauliSum> {
    if let Some(max) = f.max_mode() {
        if max >= n_qubits {
            return Err(Error::IndexOutOfRange {
                index: max,
                n_modes: n_qubits,
            });
        }
    }
    let mut terms = Vec::new();
    for (coeff, ops) in &f.terms {
        let mut acc = PauliSum::identity(n_qubits).scale(*coeff);
        for op in ops {
            acc = acc.multiply(&ladder_sum(*op, n_qubits), 0.0)?;
        }
        terms.extend(acc.terms().iter().map(|t| (t.coeff, t.string)));
    }
    PauliSum::from_terms(n_qubits, terms, DEFAULT_PRUNE_TOL)
}

/// Anti-Hermitian one-body parameter matrix `Z` with `z[q][p]* = -z[p][q]`
/// and an exactly zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    n_modes: usize,
    z: DMatrix<Complex64>,
}

impl GeneratorMatrix {
    pub fn new(z: DMatrix<Complex64>) -> Result<Self> {
        if z.nrows() != z.ncols() {
            return Err(Error::validation("generator matrix must be square"));
        }
        let n = z.nrows();
        for p in 0..n {
            if z[(p, p)] != Complex64::new(0.0, 0.0) {
                return Err(Error::validation(format!(
                    "generator matrix diagonal must be exactly zero (entry {p})"
                )));
            }
            for q in 0..p {
                if (z[(q, p)].conj() + z[(p, q)]).norm() > 1e-12 {
                    return Err(Error::validation(format!(
                        "generator matrix is not anti-Hermitian at ({p},{q})"
                    )));
                }
            }
        }
        Ok(GeneratorMatrix { n_modes: n, z })
    }

    pub fn zeros(n_modes: usize) -> Self {
        GeneratorMatrix {
            n_modes,
            z: DMatrix::zeros(n_modes, n_modes),
        }
    }

    /// Real antisymmetric matrix with `z[p][q] = amplitude` and
    /// `z[q][p] = -amplitude` for each pair, i.e. the generator of
    /// `amplitude * sum (a_p^dag a_q - a_q^dag a_p)`.
    pub fn from_excitations(n_modes: usize, pairs: &[(usize, usize)], amplitude: f64) -> Result<Self> {
        let mut z = DMatrix::zeros(n_modes, n_modes);
        for &(p, q) in pairs {
            if p >= n_modes || q >= n_modes {
                return Err(Error::IndexOutOfRange {
                    index: p.max(q),
                    n_modes,
                });
            }
            if p == q {
                return Err(Error::validation("diagonal excitation is not allowed"));
            }
            z[(p, q)] += Complex64::new(amplitude, 0.0);
            z[(q, p)] -= Complex64::new(amplitude, 0.0);
        }
        GeneratorMatrix::new(z)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.z
    }

    /// Scales by a real factor; anti-Hermiticity is preserved.
    pub fn scaled(&self, factor: f64) -> Self {
        GeneratorMatrix {
            n_modes: self.n_modes,
            z: self.z.map(|v| v * factor),
        }
    }

    pub fn nnz(&self) -> usize {
        self.z.iter().filter(|v| v.norm() > 0.0).count()
    }
}

/// Jordan-Wigner image of `Gamma(Z) = sum_{p!=q} z_pq a_p^dag a_q`. The
/// output is anti-Hermitian.
pub fn generator_sum(zmat: &GeneratorMatrix) -> Result<PauliSum> {
    let n = zmat.n_modes;
    let mut f = FermionOperator::new();
    for p in 0..n {
        for q in 0..n {
            let c = zmat.z[(p, q)];
            if c != Complex64::new(0.0, 0.0) {
                f.add_term(c, vec![LadderOp::create(p), LadderOp::annihilate(q)]);
            }
        }
    }
    jordan_wigner(&f, n)
}

/// Hartree-Fock reference: which modes are occupied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceState {
    n_modes: usize,
    occupied: Vec<usize>,
}

impl ReferenceState {
    pub fn new(n_modes: usize, occupied: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut occ: Vec<usize> = occupied.into_iter().collect();
        occ.sort_unstable();
        occ.dedup();
        if let Some(&max) = occ.last() {
            if max >= n_modes {
                return Err(Error::IndexOutOfRange {
                    index: max,
                    n_modes,
                });
            }
        }
        Ok(ReferenceState {
            n_modes,
            occupied: occ,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn n_particles(&self) -> usize {
        self.occupied.len()
    }

    pub fn occupation_mask(&self) -> u64 {
        self.occupied.iter().fold(0u64, |m, &p| m | 1 << p)
    }
}

/// Computational-basis statevector with bit `p` set iff mode `p` is
/// occupied.
pub fn hf_statevector(reference: &ReferenceState) -> StateVector {
    StateVector::basis_state(reference.n_modes, reference.occupation_mask())
        .expect("reference indices validated")
}

/// Assignment of (spatial orbital, spin) pairs to mode/qubit indices.
/// FCIDUMP fixes its own spatial enumeration, so reaching a particular
/// spin-orbital layout is configuration, not convention guessing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinOrbitalMap {
    n_spatial: usize,
    // index [2*s + spin] -> mode, spin 0 = alpha, 1 = beta
    table: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Alpha,
    Beta,
}

impl SpinOrbitalMap {
    /// Blocked layout: occupied-alpha, occupied-beta, virtual-alpha,
    /// virtual-beta, with `n_occ = n_electrons / 2` doubly occupied
    /// spatial orbitals. For a 4-orbital, 4-electron closed-shell system
    /// this yields modes 0,1 = occ-alpha, 2,3 = occ-beta, 4,5 =
    /// virt-alpha, 6,7 = virt-beta.
    pub fn blocked(n_spatial: usize, n_electrons: usize) -> Result<Self> {
        if !n_electrons.is_multiple_of(2) || n_electrons / 2 > n_spatial {
            return Err(Error::validation(format!(
                "blocked layout requires a closed shell: {n_electrons} electrons in {n_spatial} orbitals"
            )));
        }
        let n_occ = n_electrons / 2;
        let n_virt = n_spatial - n_occ;
        let mut table = vec![0; 2 * n_spatial];
        for s in 0..n_spatial {
            let (alpha, beta) = if s < n_occ {
                (s, n_occ + s)
            } else {
                (2 * n_occ + (s - n_occ), 2 * n_occ + n_virt + (s - n_occ))
            };
            table[2 * s] = alpha;
            table[2 * s + 1] = beta;
        }
        Ok(SpinOrbitalMap { n_spatial, table })
    }

    /// Interleaved layout: mode `2s` is alpha of spatial `s`, mode `2s+1`
    /// its beta partner.
    pub fn interleaved(n_spatial: usize) -> Self {
        SpinOrbitalMap {
            n_spatial,
            table: (0..2 * n_spatial).collect(),
        }
    }

    /// Explicit table: `table[2s]` is the mode of (spatial s, alpha),
    /// `table[2s+1]` of (spatial s, beta). Must be a permutation of
    /// `0..2*n_spatial`.
    pub fn custom(n_spatial: usize, table: Vec<usize>) -> Result<Self> {
        if table.len() != 2 * n_spatial {
            return Err(Error::validation("spin-orbital table has wrong length"));
        }
        let mut seen = vec![false; 2 * n_spatial];
        for &m in &table {
            if m >= 2 * n_spatial || seen[m] {
                return Err(Error::validation(
                    "spin-orbital table is not a permutation",
                ));
            }
            seen[m] = true;
        }
        Ok(SpinOrbitalMap { n_spatial, table })
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_spatial
    }

    pub fn mode(&self, spatial: usize, spin: Spin) -> usize {
        self.table[2 * spatial + if spin == Spin::Beta { 1 } else { 0 }]
    }

    /// Bitmask of all alpha modes; used for S_z sector filters.
    pub fn alpha_mask(&self) -> u64 {
        (0..self.n_spatial).fold(0u64, |m, s| m | 1 << self.mode(s, Spin::Alpha))
    }

    /// Modes occupied in the closed-shell reference: both spins of the
    /// lowest `n_electrons / 2` spatial orbitals.
    pub fn reference(&self, n_electrons: usize) -> Result<ReferenceState> {
        if !n_electrons.is_multiple_of(2) {
            return Err(Error::validation("closed-shell reference needs even electron count"));
        }
        let occ: Vec<usize> = (0..n_electrons / 2)
            .flat_map(|s| [self.mode(s, Spin::Alpha), self.mode(s, Spin::Beta)])
            .collect();
        ReferenceState::new(self.n_modes(), occ)
    }
}

/// Electronic-structure integrals in chemists' notation, all values in
/// Hartree.
#[derive(Debug, Clone)]
pub struct IntegralSet {
    n_spatial: usize,
    core_energy: f64,
    one_body: DMatrix<f64>,
    /// (ij|kl) with the flat index ((i*n + j)*n + k)*n + l.
    two_body: Vec<f64>,
    n_electrons: usize,
    ms2: i64,
}

impl IntegralSet {
    pub fn new(
        n_spatial: usize,
        core_energy: f64,
        one_body: DMatrix<f64>,
        two_body: Vec<f64>,
        n_electrons: usize,
        ms2: i64,
    ) -> Result<Self> {
        if one_body.nrows() != n_spatial || one_body.ncols() != n_spatial {
            return Err(Error::validation("one-body matrix has wrong shape"));
        }
        if two_body.len() != n_spatial.pow(4) {
            return Err(Error::validation("two-body array has wrong length"));
        }
        let set = IntegralSet {
            n_spatial,
            core_energy,
            one_body,
            two_body,
            n_electrons,
            ms2,
        };
        set.validate_symmetry(1e-10)?;
        Ok(set)
    }

    fn validate_symmetry(&self, tol: f64) -> Result<()> {
        let n = self.n_spatial;
        for i in 0..n {
            for j in 0..n {
                if (self.one_body[(i, j)] - self.one_body[(j, i)]).abs() > tol {
                    return Err(Error::validation(format!(
                        "one-body integrals not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.two_body_el(i, j, k, l);
                        for (a, b, c, d) in eightfold(i, j, k, l) {
                            if (self.two_body_el(a, b, c, d) - v).abs() > tol {
                                return Err(Error::validation(format!(
                                    "two-body integrals break 8-fold symmetry at ({i}{j}|{k}{l})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn ms2(&self) -> i64 {
        self.ms2
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    pub fn one_body_el(&self, i: usize, j: usize) -> f64 {
        self.one_body[(i, j)]
    }

    /// Chemists' (ij|kl).
    pub fn two_body_el(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n_spatial;
        self.two_body[((i * n + j) * n + k) * n + l]
    }
}

/// The 8 permutational images of a chemists' (ij|kl) index quadruple.
pub(crate) fn eightfold(
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> [(usize, usize, usize, usize); 8] {
    [
        (i, j, k, l),
        (j, i, k, l),
        (i, j, l, k),
        (j, i, l, k),
        (k, l, i, j),
        (l, k, i, j),
        (k, l, j, i),
        (l, k, j, i),
    ]
}

/// Spin-orbital second-quantized Hamiltonian mapped through Jordan-Wigner:
/// `E_core + sum h_pq a^dag_P a_Q + 1/2 sum (pq|rs) a^dag_P a^dag_R a_S a_Q`
/// summed over both spins, with mode indices assigned by `map`.
pub fn build_hamiltonian(ints: &IntegralSet, map: &SpinOrbitalMap) -> Result<PauliSum> {
    if map.n_spatial() != ints.n_spatial() {
        return Err(Error::validation(
            "spin-orbital map does not match integral set",
        ));
    }
    let n = ints.n_spatial();
    let n_qubits = 2 * n;
    let spins = [Spin::Alpha, Spin::Beta];
    let mut f = FermionOperator::new();
    f.add_term(Complex64::new(ints.core_energy(), 0.0), vec![]);
    for p in 0..n {
        for q in 0..n {
            let h = ints.one_body_el(p, q);
            if h == 0.0 {
                continue;
            }
            for spin in spins {
                f.add_term(
                    Complex64::new(h, 0.0),
                    vec![
                        LadderOp::create(map.mode(p, spin)),
                        LadderOp::annihilate(map.mode(q, spin)),
                    ],
                );
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let g = ints.two_body_el(p, q, r, s);
                    if g == 0.0 {
                        continue;
                    }
                    for sigma in spins {
                        for tau in spins {
                            f.add_term(
                                Complex64::new(0.5 * g, 0.0),
                                vec![
                                    LadderOp::create(map.mode(p, sigma)),
                                    LadderOp::create(map.mode(r, tau)),
                                    LadderOp::annihilate(map.mode(s, tau)),
                                    LadderOp::annihilate(map.mode(q, sigma)),
                                ],
                            );
                        }
                    }
                }
            }
        }
    }
    let h = jordan_wigner(&f, n_qubits)?;
    if !h.is_hermitian(1e-9) {
        return Err(Error::validation(
            "assembled Hamiltonian is not Hermitian; check integral symmetry",
        ));
    }
    Ok(h)
}
