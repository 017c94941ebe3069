//! Exponentials of anti-Hermitian Pauli sums, kept as Pauli sums rather
//! than circuits.
//!
//! A single Hermitian string exponentiates in closed form,
//! `e^{i t P} = cos(t) I + i sin(t) P`. When all strings of a generator
//! commute pairwise the exponential is an exact product of such factors;
//! otherwise a second-order Suzuki product approximates it and the step
//! plan is recorded alongside the result.

use num_complex::Complex64;

use crate::pauli::{PauliString, PauliSum};
use crate::{Error, Result};

/// Tolerance on the real parts of canonical coefficients when checking
/// that a generator is anti-Hermitian.
const ANTI_HERMITIAN_TOL: f64 = 1e-10;

/// Step plan of a Suzuki product formula for `e^{i sum_l s_l P_l}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterPlan {
    terms: Vec<(f64, PauliString)>,
    order: u8,
    steps: usize,
    error_budget: f64,
}

impl TrotterPlan {
    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn error_budget(&self) -> f64 {
        self.error_budget
    }

    pub fn max_angle(&self) -> f64 {
        self.terms.iter().map(|(s, _)| s.abs()).fold(0.0, f64::max)
    }

    /// A-priori error scale of the second-order formula, m^3 s^3 / r^2.
    pub fn a_priori_bound(&self) -> f64 {
        let m = self.terms.len() as f64;
        let s = self.max_angle();
        m.powi(3) * s.powi(3) / (self.steps as f64).powi(2)
    }
}

/// Whether a unitary-as-Pauli-sum is exact or carries Trotter error, with
/// the plans that produced it.
#[derive(Debug, Clone, PartialEq)]
pub enum Exactness {
    Exact,
    Trotterized(Vec<TrotterPlan>),
}

/// A unitary operator expanded as a canonical Pauli sum.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryAsPauliSum {
    value: PauliSum,
    exactness: Exactness,
}

impl UnitaryAsPauliSum {
    pub fn value(&self) -> &PauliSum {
        &self.value
    }

    pub fn exactness(&self) -> &Exactness {
        &self.exactness
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.exactness, Exactness::Exact)
    }

    pub fn n_qubits(&self) -> usize {
        self.value.n_qubits()
    }

    /// The adjoint; for these unitaries that is the inverse.
    pub fn adjoint(&self) -> Self {
        UnitaryAsPauliSum {
            value: self.value.adjoint(),
            exactness: self.exactness.clone(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        UnitaryAsPauliSum {
            value: PauliSum::identity(n_qubits),
            exactness: Exactness::Exact,
        }
    }
}

/// Exact closed form `e^{i theta P} = cos(theta) I + i sin(theta) P` for a
/// Hermitian string. A -1 string phase is folded into the angle.
pub fn exp_single(theta: f64, p: &PauliString) -> Result<UnitaryAsPauliSum> {
    if !p.is_hermitian() {
        return Err(Error::validation(
            "exp_single requires a Hermitian Pauli string (phase +-1)",
        ));
    }
    let theta = if p.phase_power() == 2 { -theta } else { theta };
    let n = p.n_qubits();
    let value = PauliSum::from_terms(
        n,
        [
            (Complex64::new(theta.cos(), 0.0), PauliString::identity(n)),
            (Complex64::new(0.0, theta.sin()), p.base()),
        ],
        0.0,
    )?;
    Ok(UnitaryAsPauliSum {
        value,
        exactness: Exactness::Exact,
    })
}

/// Canonical angles `theta_l` of an anti-Hermitian sum `i sum theta_l B_l`.
fn angles(g: &PauliSum) -> Result<Vec<(f64, PauliString)>> {
    if !g.is_anti_hermitian(ANTI_HERMITIAN_TOL) {
        return Err(Error::validation("generator is not anti-Hermitian"));
    }
    Ok(g.terms().iter().map(|t| (t.coeff.im, t.string)).collect())
}

fn all_pairs_commute(g: &PauliSum) -> bool {
    let terms = g.terms();
    for (i, a) in terms.iter().enumerate() {
        for b in &terms[i + 1..] {
            if !a.string.commutes(&b.string).expect("same qubit count") {
                return false;
            }
        }
    }
    true
}

/// Exact exponential of an anti-Hermitian sum whose strings all commute
/// pairwise: the expanded product of `exp_single` factors. The term count
/// is at most 2^m for m distinct strings.
pub fn exp_commuting(g: &PauliSum) -> Result<UnitaryAsPauliSum> {
    if !all_pairs_commute(g) {
        return Err(Error::validation(
            "generator strings do not all commute; use trotterize",
        ));
    }
    let mut value = PauliSum::identity(g.n_qubits());
    for (theta, string) in angles(g)? {
        value = value.multiply(exp_single(theta, &string)?.value(), 0.0)?;
    }
    Ok(UnitaryAsPauliSum {
        value,
        exactness: Exactness::Exact,
    })
}

/// Second-order Suzuki product with an explicit step count `r`:
/// `( prod_l e^{i s_l/(2r) P_l} prod_{l rev} e^{i s_l/(2r) P_l} )^r`.
pub fn suzuki_second_order(g: &PauliSum, r: usize) -> Result<UnitaryAsPauliSum> {
    if r == 0 {
        return Err(Error::validation("step count must be at least 1"));
    }
    let terms = angles(g)?;
    let n = g.n_qubits();
    let mut step = PauliSum::identity(n);
    let half = |theta: f64| theta / (2.0 * r as f64);
    for (theta, string) in terms.iter() {
        step = step.multiply(exp_single(half(*theta), string)?.value(), 0.0)?;
    }
    for (theta, string) in terms.iter().rev() {
        step = step.multiply(exp_single(half(*theta), string)?.value(), 0.0)?;
    }
    let value = pow(&step, r)?;
    let plan = TrotterPlan {
        terms,
        order: 2,
        steps: r,
        error_budget: f64::NAN,
    };
    Ok(UnitaryAsPauliSum {
        value,
        exactness: Exactness::Trotterized(vec![plan]),
    })
}

fn pow(base: &PauliSum, mut exp: usize) -> Result<PauliSum> {
    let mut result = PauliSum::identity(base.n_qubits());
    let mut sq = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result = result.multiply(&sq, 0.0)?;
        }
        exp >>= 1;
        if exp > 0 {
            sq = sq.multiply(&sq, 0.0)?;
        }
    }
    Ok(result)
}

/// Exponential of an anti-Hermitian sum within the error budget `epsilon`.
/// Commuting generators take the exact path; otherwise a second-order
/// Suzuki product with `r = ceil(sqrt(m^3 s^3 / epsilon))` steps is built
/// and its plan recorded.
pub fn trotterize(g: &PauliSum, epsilon: f64) -> Result<UnitaryAsPauliSum> {
    if epsilon <= 0.0 {
        return Err(Error::validation("error budget must be positive"));
    }
    if all_pairs_commute(g) {
        return exp_commuting(g);
    }
    let terms = angles(g)?;
    let m = terms.len() as f64;
    let s = terms.iter().map(|(t, _)| t.abs()).fold(0.0, f64::max);
    let r = (m.powi(3) * s.powi(3) / epsilon).sqrt().ceil().max(1.0) as usize;
    let mut out = suzuki_second_order(g, r)?;
    if let Exactness::Trotterized(plans) = &mut out.exactness {
        for p in plans {
            p.error_budget = epsilon;
        }
    }
    Ok(out)
}

/// Default error budget used when a caller gives none.
pub const DEFAULT_TROTTER_BUDGET: f64 = 1e-8;

/// Ordered product of unitaries given in application order: element 0 acts
/// on the state first, so the returned operator is
/// `u[k-1] * ... * u[1] * u[0]`. Exact iff every factor is exact.
pub fn product(unitaries: &[UnitaryAsPauliSum]) -> Result<UnitaryAsPauliSum> {
    let first = unitaries
        .first()
        .ok_or_else(|| Error::validation("empty product"))?;
    let mut value = first.value().clone();
    let mut plans: Vec<TrotterPlan> = Vec::new();
    let mut collect = |e: &Exactness| {
        if let Exactness::Trotterized(p) = e {
            plans.extend(p.iter().cloned());
        }
    };
    collect(first.exactness());
    for u in &unitaries[1..] {
        value = u.value().multiply(&value, 0.0)?;
        collect(u.exactness());
    }
    Ok(UnitaryAsPauliSum {
        value,
        exactness: if plans.is_empty() {
            Exactness::Exact
        } else {
            Exactness::Trotterized(plans)
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::{generator_sum, GeneratorMatrix};
    use crate::testkit;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ps(label: &str) -> PauliString {
        label.parse().unwrap()
    }

    /// Dense e^g for anti-Hermitian g = iA via Hermitian diagonalization
    /// of A.
    fn dense_exp_anti_hermitian(g: &PauliSum) -> DMatrix<Complex64> {
        let a = g.to_dense().map(|v| v * c(0.0, -1.0)); // A = -i g, Hermitian
        testkit::expm_i_hermitian(&a, 1.0)
    }

    #[test]
    fn exp_single_examples() {
        let u = exp_single(0.0, &ps("XZ")).unwrap();
        assert!(testkit::max_abs_diff(
            &u.value().to_dense(),
            &DMatrix::identity(4, 4)
        ) < 1e-15);

        let u = exp_single(std::f64::consts::FRAC_PI_2, &ps("X")).unwrap();
        let want = testkit::dense_from_label("X") * c(0.0, 1.0);
        assert!(testkit::max_abs_diff(&u.value().to_dense(), &want) < 1e-15);

        let u = exp_single(0.3, &ps("XZ")).unwrap();
        let want = testkit::expm_i_hermitian(&testkit::dense_from_label("XZ"), 0.3);
        assert!(testkit::max_abs_diff(&u.value().to_dense(), &want) < 1e-12);
    }

    #[test]
    fn exp_single_rejects_non_hermitian_phase() {
        let p = ps("X").multiply(&ps("Y")).unwrap(); // iZ
        assert!(!p.is_hermitian());
        assert!(exp_single(0.2, &p).is_err());
    }

    #[test]
    fn exp_single_folds_negative_phase() {
        let minus_x: PauliString = "-X".parse().unwrap();
        let u = exp_single(0.4, &minus_x).unwrap();
        let want = testkit::expm_i_hermitian(&testkit::dense_from_label("X"), -0.4);
        assert!(testkit::max_abs_diff(&u.value().to_dense(), &want) < 1e-13);
    }

    #[test]
    fn exp_commuting_of_zero_is_identity() {
        let u = exp_commuting(&PauliSum::zero(2)).unwrap();
        assert!(u.is_exact());
        assert_eq!(u.value(), &PauliSum::identity(2));
    }

    #[test]
    fn exp_commuting_matches_dense_expm_for_h4_generator() {
        let r1 = generator_sum(
            &GeneratorMatrix::from_excitations(8, &[(4, 1), (6, 3)], 1.0).unwrap(),
        )
        .unwrap();
        let g = r1.scale(c(0.5, 0.0)); // t = 0.5
        let u = exp_commuting(&g).unwrap();
        assert!(u.value().len() <= 1 << g.len());
        let want = dense_exp_anti_hermitian(&g);
        assert!(testkit::max_abs_diff(&u.value().to_dense(), &want) < 1e-12);

        // the image of the HF state stays normalized
        let hf = crate::simulator::StateVector::basis_state(8, 0b1111).unwrap();
        let img = hf.apply_unitary(u.value()).unwrap();
        assert!((img.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_commuting_rejects_noncommuting_input() {
        let g = PauliSum::from_terms(1, [(c(0.0, 0.3), ps("X")), (c(0.0, 0.4), ps("Z"))], 0.0)
            .unwrap();
        assert!(exp_commuting(&g).is_err());
    }

    #[test]
    fn exp_commuting_adjoint_is_exp_of_negation() {
        let g = PauliSum::from_terms(
            3,
            [(c(0.0, 0.7), ps("ZZI")), (c(0.0, -0.2), ps("IZZ"))],
            0.0,
        )
        .unwrap();
        let u = exp_commuting(&g).unwrap();
        let v = exp_commuting(&g.scale(c(-1.0, 0.0))).unwrap();
        let mut lhs = u.value().adjoint();
        lhs.canonicalize(0.0);
        assert_eq!(&lhs, v.value());
    }

    #[test]
    fn trotterize_on_commuting_input_matches_exact_path() {
        let g = PauliSum::from_terms(
            2,
            [(c(0.0, 0.5), ps("ZI")), (c(0.0, -0.3), ps("ZZ"))],
            0.0,
        )
        .unwrap();
        let exact = exp_commuting(&g).unwrap();
        let t = trotterize(&g, 1e-10).unwrap();
        assert!(t.is_exact());
        assert!(testkit::max_abs_diff(&t.value().to_dense(), &exact.value().to_dense()) < 1e-12);
        // the plain product formula is also exact here, for any r
        for r in [1, 3] {
            let s = suzuki_second_order(&g, r).unwrap();
            assert!(
                testkit::max_abs_diff(&s.value().to_dense(), &exact.value().to_dense()) < 1e-12
            );
        }
    }

    #[test]
    fn suzuki_error_scales_quadratically_in_steps() {
        let g = PauliSum::from_terms(1, [(c(0.0, 0.3), ps("X")), (c(0.0, 0.4), ps("Z"))], 0.0)
            .unwrap();
        let want = dense_exp_anti_hermitian(&g);
        let errs: Vec<f64> = [1usize, 2, 4, 8, 16]
            .iter()
            .map(|&r| {
                let u = suzuki_second_order(&g, r).unwrap();
                testkit::max_abs_diff(&u.value().to_dense(), &want)
            })
            .collect();
        // least-squares slope on log-log
        let xs: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0, 16.0].iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope + 2.0).abs() < 0.1, "slope {slope}, errors {errs:?}");
    }

    #[test]
    fn trotterize_budget_controls_error() {
        let g = PauliSum::from_terms(1, [(c(0.0, 0.3), ps("X")), (c(0.0, 0.4), ps("Z"))], 0.0)
            .unwrap();
        let u = trotterize(&g, 1e-8).unwrap();
        match u.exactness() {
            Exactness::Trotterized(plans) => {
                assert_eq!(plans.len(), 1);
                assert_eq!(plans[0].order(), 2);
                assert!(plans[0].steps() >= 1);
                assert!(plans[0].a_priori_bound() <= 1e-8 * 1.0001);
            }
            Exactness::Exact => panic!("non-commuting input cannot be exact"),
        }
        let want = dense_exp_anti_hermitian(&g);
        assert!(testkit::max_abs_diff(&u.value().to_dense(), &want) < 1e-7);
        assert!(trotterize(&g, 0.0).is_err());
    }

    #[test]
    fn product_examples() {
        let r1 = generator_sum(
            &GeneratorMatrix::from_excitations(8, &[(4, 1), (6, 3)], 1.0).unwrap(),
        )
        .unwrap();
        let r3 = generator_sum(
            &GeneratorMatrix::from_excitations(8, &[(5, 1), (7, 3)], 1.0).unwrap(),
        )
        .unwrap();
        let r4 = generator_sum(
            &GeneratorMatrix::from_excitations(8, &[(4, 0), (6, 2)], 1.0).unwrap(),
        )
        .unwrap();
        let t5 = 0.7;
        let e1 = exp_commuting(&r1.scale(c(t5, 0.0))).unwrap();
        let e3 = exp_commuting(&r3.scale(c(t5, 0.0))).unwrap();
        let e4 = exp_commuting(&r4.scale(c(t5, 0.0))).unwrap();

        // single factor passes through unchanged
        let single = product(std::slice::from_ref(&e3)).unwrap();
        assert_eq!(single.value(), e3.value());

        // R3 and R4 act on disjoint mode sets, so their exponentials
        // commute: the dense oracle gives equal matrices in both orders.
        let a = product(&[e4.clone(), e3.clone()]).unwrap();
        let b = product(&[e3.clone(), e4.clone()]).unwrap();
        assert!(a.is_exact() && b.is_exact());
        assert!(testkit::max_abs_diff(&a.value().to_dense(), &b.value().to_dense()) < 1e-12);

        // R1 and R3 share modes 1 and 3; there the order matters.
        let ab = product(&[e1.clone(), e3.clone()]).unwrap();
        let ba = product(&[e3.clone(), e1.clone()]).unwrap();
        let diff = testkit::max_abs_diff(&ab.value().to_dense(), &ba.value().to_dense());
        assert!(diff > 1e-6, "products unexpectedly equal: {diff}");

        // U * U^dag = I
        let udag = a.adjoint();
        let id = product(&[a.clone(), udag]).unwrap();
        let dim = 1 << 8;
        assert!(
            testkit::max_abs_diff(&id.value().to_dense(), &DMatrix::identity(dim, dim)) < 1e-10
        );
    }

    #[test]
    fn purification_removes_single_excitations() {
        use crate::fermion::{hf_statevector, jordan_wigner, FermionOperator, ReferenceState};
        // 4 modes, reference occ = {0,1}; R = (a_2^dag a_0 + a_3^dag a_1) - h.c.
        let g = generator_sum(
            &GeneratorMatrix::from_excitations(4, &[(2, 0), (3, 1)], 1.0).unwrap(),
        )
        .unwrap();
        let phi = hf_statevector(&ReferenceState::new(4, [0, 1]).unwrap());
        for t in [0.37, 1.29, -0.64] {
            let plus = exp_commuting(&g.scale(c(t, 0.0))).unwrap();
            let minus = exp_commuting(&g.scale(c(-t, 0.0))).unwrap();
            let combined = phi.apply_operator(plus.value()).unwrap()
                + phi.apply_operator(minus.value()).unwrap();
            for i in [0usize, 1] {
                for a in [2usize, 3] {
                    let mut f = FermionOperator::new();
                    f.add_term(
                        c(1.0, 0.0),
                        vec![
                            crate::fermion::LadderOp::create(a),
                            crate::fermion::LadderOp::annihilate(i),
                        ],
                    );
                    let excited = phi
                        .apply_operator(&jordan_wigner(&f, 4).unwrap())
                        .unwrap();
                    let overlap: Complex64 = excited.dotc(&combined);
                    assert!(
                        overlap.norm() < 1e-10,
                        "single excitation {a}<-{i} survives at t={t}: {overlap}"
                    );
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn exact_exponentials_are_unitary(
            zmasks in proptest::collection::vec(1u64..16, 1..4),
            thetas in proptest::collection::vec(-1.5f64..1.5, 4),
        ) {
            // Z-diagonal strings always commute pairwise.
            let terms: Vec<(Complex64, PauliString)> = zmasks
                .iter()
                .zip(&thetas)
                .map(|(&z, &t)| (c(0.0, t), PauliString::new(4, 0, z, 0).unwrap()))
                .collect();
            let g = PauliSum::from_terms(4, terms, 0.0).unwrap();
            let u = exp_commuting(&g).unwrap();
            let d = u.value().to_dense();
            let gram = d.adjoint() * &d;
            prop_assert!(testkit::max_abs_diff(&gram, &DMatrix::identity(16, 16)) < 1e-10);
        }
    }
}
