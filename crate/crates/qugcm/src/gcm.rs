//! Sampling schemes and kernel-matrix assembly.
//!
//! A scheme is a list of generator products; each product is an ordered
//! list of (template, sign, t-slot) factors whose exponentials are applied
//! right-to-left to the reference state. Kernel entries are evaluated
//! operator-side: `V_p^dag (H V_q)` and `V_p^dag V_q` are expanded as
//! Pauli sums classically and every string is measured against the fixed
//! reference, with entries computed for p <= q only and mirrored by
//! conjugate symmetry.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{solve_generalized, EigenSolution};
use crate::expgen::{self, UnitaryAsPauliSum, DEFAULT_TROTTER_BUDGET};
use crate::fermion::{generator_sum, hf_statevector, GeneratorMatrix, ReferenceState};
use crate::pauli::PauliSum;
use crate::simulator::{
    sample_kernel_entry, shot_bound, Block, ExpectationCache, ShotModel, ShotMode, StateVector,
};
use crate::{Error, Result};

/// One exponential factor of a generator product: the template matrix is
/// scaled by `sign * t[t_slot]` at evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFactor {
    pub template: GeneratorMatrix,
    pub sign: f64,
    pub t_slot: usize,
}

/// An ordered product of Thouless exponentials; factors are applied
/// right-to-left, i.e. `factors[0]` acts on the reference first. The
/// identity product (the bare reference) has no factors.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorProduct {
    pub label: String,
    pub factors: Vec<ProductFactor>,
}

impl GeneratorProduct {
    pub fn identity(label: impl Into<String>) -> Self {
        GeneratorProduct {
            label: label.into(),
            factors: Vec::new(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }
}

/// A discretized coordinate grid: M generator products plus the parameter
/// vector feeding their t-slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingScheme {
    n_modes: usize,
    products: Vec<GeneratorProduct>,
    t_values: Vec<f64>,
}

impl SamplingScheme {
    pub fn new(
        n_modes: usize,
        products: Vec<GeneratorProduct>,
        t_values: Vec<f64>,
    ) -> Result<Self> {
        if products.is_empty() {
            return Err(Error::validation("a scheme needs at least one product"));
        }
        for p in &products {
            for f in &p.factors {
                if f.template.n_modes() != n_modes {
                    return Err(Error::DimensionMismatch {
                        left: n_modes,
                        right: f.template.n_modes(),
                    });
                }
                if f.t_slot >= t_values.len() {
                    return Err(Error::validation(format!(
                        "product {} references t-slot {} but only {} values are set",
                        p.label,
                        f.t_slot,
                        t_values.len()
                    )));
                }
                if f.sign != 1.0 && f.sign != -1.0 {
                    return Err(Error::validation("factor sign must be +1 or -1"));
                }
            }
        }
        Ok(SamplingScheme {
            n_modes,
            products,
            t_values,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn products(&self) -> &[GeneratorProduct] {
        &self.products
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn n_slots(&self) -> usize {
        self.t_values.len()
    }

    /// Same grid with a new parameter vector.
    pub fn with_t(&self, t_values: Vec<f64>) -> Result<Self> {
        SamplingScheme::new(self.n_modes, self.products.clone(), t_values)
    }

    /// The first `m` products, for nested-subspace studies.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        SamplingScheme::new(
            self.n_modes,
            self.products[..m.min(self.products.len())].to_vec(),
            self.t_values.clone(),
        )
    }

    /// Exact (or Trotterized, for non-commuting custom generators)
    /// unitary of product `i` as a Pauli sum.
    pub fn unitary(&self, i: usize) -> Result<UnitaryAsPauliSum> {
        let product = &self.products[i];
        if product.is_identity() {
            return Ok(UnitaryAsPauliSum::identity(self.n_modes));
        }
        let factors: Vec<UnitaryAsPauliSum> = product
            .factors
            .iter()
            .map(|f| {
                let g = generator_sum(&f.template.scaled(f.sign * self.t_values[f.t_slot]))?;
                expgen::trotterize(&g, DEFAULT_TROTTER_BUDGET)
            })
            .collect::<Result<_>>()?;
        expgen::product(&factors)
    }
}

/// The built-in H4 grid: reference, four single-generator pairs `R_i^+-`,
/// the two cross products `R_5`, `R_6`, and the four sign combinations of
/// `e^{+-t7 R2} e^{+-t7 R1}`, M = 15 in total. Generators are the paper
/// pairs in 0-based modes under the blocked spin-orbital layout.
pub fn h4_scheme(t: [f64; 7]) -> SamplingScheme {
    let template = |pairs: &[(usize, usize)]| {
        GeneratorMatrix::from_excitations(8, pairs, 1.0).expect("valid H4 excitation pairs")
    };
    let r1 = template(&[(4, 1), (6, 3)]);
    let r2 = template(&[(5, 0), (7, 2)]);
    let r3 = template(&[(5, 1), (7, 3)]);
    let r4 = template(&[(4, 0), (6, 2)]);
    let factor = |t: &GeneratorMatrix, sign: f64, slot: usize| ProductFactor {
        template: t.clone(),
        sign,
        t_slot: slot,
    };
    let mut products = vec![GeneratorProduct::identity("R0")];
    for (i, r) in [&r1, &r2, &r3, &r4].into_iter().enumerate() {
        for sign in [1.0, -1.0] {
            products.push(GeneratorProduct {
                label: format!("R{}{}", i + 1, if sign > 0.0 { "+" } else { "-" }),
                factors: vec![factor(r, sign, i)],
            });
        }
    }
    // R5 = e^{t5 R3} e^{t5 R4}: R4 applied first.
    products.push(GeneratorProduct {
        label: "R5".into(),
        factors: vec![factor(&r4, 1.0, 4), factor(&r3, 1.0, 4)],
    });
    products.push(GeneratorProduct {
        label: "R6".into(),
        factors: vec![factor(&r3, 1.0, 5), factor(&r4, 1.0, 5)],
    });
    // e^{s2 t7 R2} e^{s1 t7 R1} over all four sign patterns: R1 first.
    for s2 in [1.0, -1.0] {
        for s1 in [1.0, -1.0] {
            products.push(GeneratorProduct {
                label: format!(
                    "R2{}R1{}",
                    if s2 > 0.0 { "+" } else { "-" },
                    if s1 > 0.0 { "+" } else { "-" }
                ),
                factors: vec![factor(&r1, s1, 6), factor(&r2, s2, 6)],
            });
        }
    }
    SamplingScheme::new(8, products, t.to_vec()).expect("built-in scheme is well-formed")
}

/// Applies each product's exponential to the reference state; the dense
/// oracle path for kernel assembly.
pub fn basis_states(
    scheme: &SamplingScheme,
    reference: &ReferenceState,
) -> Result<Vec<StateVector>> {
    if reference.n_modes() != scheme.n_modes() {
        return Err(Error::DimensionMismatch {
            left: scheme.n_modes(),
            right: reference.n_modes(),
        });
    }
    let phi = hf_statevector(reference);
    scheme
        .products()
        .iter()
        .map(|product| {
            let mut state = phi.clone();
            for f in &product.factors {
                let g = generator_sum(&f.template.scaled(f.sign * scheme.t_values()[f.t_slot]))?;
                let u = expgen::trotterize(&g, DEFAULT_TROTTER_BUDGET)?;
                state = state.apply_unitary(u.value())?;
            }
            Ok(state)
        })
        .collect()
}

/// Where a kernel pair came from; embedded in every serialized artifact.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub scheme: String,
    pub t_values: Vec<f64>,
    pub shot_model: ShotModel,
    /// Coefficient 1-norm of the ingested Hamiltonian.
    pub hamiltonian_one_norm: f64,
    pub n_qubits: usize,
}

/// The discretized Hill-Wheeler kernel matrices with per-entry shot
/// bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPair {
    m: usize,
    h: DMatrix<Complex64>,
    s: DMatrix<Complex64>,
    h_bounds: DMatrix<f64>,
    s_bounds: DMatrix<f64>,
    provenance: Provenance,
}

impl KernelPair {
    pub fn from_parts(
        h: DMatrix<Complex64>,
        s: DMatrix<Complex64>,
        h_bounds: DMatrix<f64>,
        s_bounds: DMatrix<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        let m = h.nrows();
        if h.ncols() != m || s.nrows() != m || s.ncols() != m {
            return Err(Error::validation("kernel matrices must be square and equal-sized"));
        }
        Ok(KernelPair {
            m,
            h,
            s,
            h_bounds,
            s_bounds,
            provenance,
        })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    pub fn s(&self) -> &DMatrix<Complex64> {
        &self.s
    }

    pub fn h_bounds(&self) -> &DMatrix<f64> {
        &self.h_bounds
    }

    pub fn s_bounds(&self) -> &DMatrix<f64> {
        &self.s_bounds
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Solves the non-orthogonal eigenproblem at the relative overlap
    /// threshold `tau`.
    pub fn solve(&self, tau: f64) -> Result<EigenSolution> {
        solve_generalized(&self.h, &self.s, tau)
    }

    /// A noise replicate: every computed entry (p <= q) is perturbed by a
    /// Gaussian at its recorded bound and mirrored, so the result stays
    /// Hermitian; diagonal entries take real perturbations only. Intended
    /// for exact-mode pairs.
    pub fn with_shot_noise(&self, seed: u64) -> KernelPair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = self.h.clone();
        let mut s = self.s.clone();
        for p in 0..self.m {
            for q in p..self.m {
                let nh = sample_kernel_entry(
                    self.h[(p, q)],
                    self.h_bounds[(p, q)],
                    ShotMode::MaxVarianceGaussian,
                    &mut rng,
                );
                let ns = sample_kernel_entry(
                    self.s[(p, q)],
                    self.s_bounds[(p, q)],
                    ShotMode::MaxVarianceGaussian,
                    &mut rng,
                );
                if p == q {
                    h[(p, p)] = Complex64::new(nh.re, 0.0);
                    s[(p, p)] = Complex64::new(ns.re, 0.0);
                } else {
                    h[(p, q)] = nh;
                    h[(q, p)] = nh.conj();
                    s[(p, q)] = ns;
                    s[(q, p)] = ns.conj();
                }
            }
        }
        let mut provenance = self.provenance.clone();
        provenance.shot_model.mode = ShotMode::MaxVarianceGaussian;
        provenance.shot_model.seed = seed;
        KernelPair {
            m: self.m,
            h,
            s,
            h_bounds: self.h_bounds.clone(),
            s_bounds: self.s_bounds.clone(),
            provenance,
        }
    }

    /// Same kernels with every bound multiplied by `factor`. Bounds scale
    /// as 1/sqrt(shots), so one exact assembly at unit shots serves a
    /// whole shot sweep.
    pub fn with_scaled_bounds(&self, factor: f64) -> KernelPair {
        KernelPair {
            h_bounds: self.h_bounds.map(|b| b * factor),
            s_bounds: self.s_bounds.map(|b| b * factor),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let flat_re = |m: &DMatrix<Complex64>| -> Vec<f64> {
            (0..self.m)
                .flat_map(|i| (0..self.m).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].re)
                .collect()
        };
        let flat_im = |m: &DMatrix<Complex64>| -> Vec<f64> {
            (0..self.m)
                .flat_map(|i| (0..self.m).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].im)
                .collect()
        };
        let flat = |m: &DMatrix<f64>| -> Vec<f64> {
            (0..self.m)
                .flat_map(|i| (0..self.m).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)])
                .collect()
        };
        serde_json::json!({
            "M": self.m,
            "H_re": flat_re(&self.h),
            "H_im": flat_im(&self.h),
            "S_re": flat_re(&self.s),
            "S_im": flat_im(&self.s),
            "H_bound": flat(&self.h_bounds),
            "S_bound": flat(&self.s_bounds),
            "provenance": serde_json::to_value(&self.provenance).expect("serializable"),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Repr {
            #[serde(rename = "M")]
            m: usize,
            #[serde(rename = "H_re")]
            h_re: Vec<f64>,
            #[serde(rename = "H_im")]
            h_im: Vec<f64>,
            #[serde(rename = "S_re")]
            s_re: Vec<f64>,
            #[serde(rename = "S_im")]
            s_im: Vec<f64>,
            #[serde(rename = "H_bound", default)]
            h_bound: Option<Vec<f64>>,
            #[serde(rename = "S_bound", default)]
            s_bound: Option<Vec<f64>>,
            provenance: Provenance,
        }
        let r: Repr = serde_json::from_value(value.clone())?;
        let m = r.m;
        if m == 0 {
            return Err(Error::validation("kernel size must be positive"));
        }
        for (name, v) in [
            ("H_re", &r.h_re),
            ("H_im", &r.h_im),
            ("S_re", &r.s_re),
            ("S_im", &r.s_im),
        ] {
            if v.len() != m * m {
                return Err(Error::validation(format!(
                    "{name} has {} entries, expected {}",
                    v.len(),
                    m * m
                )));
            }
        }
        let complex = |re: &[f64], im: &[f64]| {
            DMatrix::from_fn(m, m, |i, j| Complex64::new(re[i * m + j], im[i * m + j]))
        };
        let real = |v: &Option<Vec<f64>>| -> Result<DMatrix<f64>> {
            match v {
                None => Ok(DMatrix::zeros(m, m)),
                Some(v) if v.len() == m * m => {
                    Ok(DMatrix::from_fn(m, m, |i, j| v[i * m + j]))
                }
                Some(v) => Err(Error::validation(format!(
                    "bound matrix has {} entries, expected {}",
                    v.len(),
                    m * m
                ))),
            }
        };
        KernelPair::from_parts(
            complex(&r.h_re, &r.h_im),
            complex(&r.s_re, &r.s_im),
            real(&r.h_bound)?,
            real(&r.s_bound)?,
            r.provenance,
        )
    }

    /// H and S as two CSV matrices with numpy-parseable complex entries.
    pub fn to_csv(&self) -> (String, String) {
        let fmt = |m: &DMatrix<Complex64>| {
            let mut out = String::new();
            for i in 0..self.m {
                let row: Vec<String> = (0..self.m)
                    .map(|j| format!("{:+.16e}{:+.16e}j", m[(i, j)].re, m[(i, j)].im))
                    .collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        };
        (fmt(&self.h), fmt(&self.s))
    }
}

/// Assembles the kernel pair per the hybrid algorithm: all `V_i` are
/// expanded classically, `H V_q` is formed once per column, the
/// sandwiched sums `V_p^dag (H V_q)` and `V_p^dag V_q` are measured
/// string-by-string against the reference (sharing `cache`), and entries
/// with p > q are mirrored. Entries are exact; if the model requests
/// finite shots, Gaussian noise at the per-entry bound is applied
/// afterwards under the model seed.
pub fn assemble_kernels(
    scheme: &SamplingScheme,
    hamiltonian: &PauliSum,
    reference: &ReferenceState,
    model: &ShotModel,
    cache: &ExpectationCache,
) -> Result<KernelPair> {
    let n = scheme.n_modes();
    if hamiltonian.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: hamiltonian.n_qubits(),
        });
    }
    if reference.n_modes() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: reference.n_modes(),
        });
    }
    let m = scheme.len();
    let phi = hf_statevector(reference);

    let unitaries: Vec<UnitaryAsPauliSum> = (0..m)
        .into_par_iter()
        .map(|i| scheme.unitary(i))
        .collect::<Result<_>>()?;
    let adjoints: Vec<PauliSum> = unitaries.iter().map(|u| u.value().adjoint()).collect();
    let h_columns: Vec<PauliSum> = unitaries
        .par_iter()
        .map(|u| hamiltonian.multiply(u.value(), crate::pauli::DEFAULT_PRUNE_TOL))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|p| (p..m).map(move |q| (p, q)))
        .collect();
    let entries: Vec<(usize, usize, Complex64, Complex64, f64, f64)> = pairs
        .par_iter()
        .map(|&(p, q)| {
            let sandwiched_h =
                adjoints[p].multiply(&h_columns[q], crate::pauli::DEFAULT_PRUNE_TOL)?;
            let sandwiched_s =
                adjoints[p].multiply(unitaries[q].value(), crate::pauli::DEFAULT_PRUNE_TOL)?;
            let h_pq = phi.expect_sum(&sandwiched_h, cache, Some(Block::H))?;
            let s_pq = phi.expect_sum(&sandwiched_s, cache, Some(Block::S))?;
            let gh = sandwiched_h.group_qwc();
            let gs = sandwiched_s.group_qwc();
            let bh = shot_bound(&sandwiched_h, &gh, model.entry_shots(gh.len()));
            let bs = shot_bound(&sandwiched_s, &gs, model.entry_shots(gs.len()));
            Ok((p, q, h_pq, s_pq, bh, bs))
        })
        .collect::<Result<_>>()?;

    let mut h = DMatrix::zeros(m, m);
    let mut s = DMatrix::zeros(m, m);
    let mut h_bounds = DMatrix::zeros(m, m);
    let mut s_bounds = DMatrix::zeros(m, m);
    for (p, q, h_pq, s_pq, bh, bs) in entries {
        h[(p, q)] = h_pq;
        h[(q, p)] = h_pq.conj();
        s[(p, q)] = s_pq;
        s[(q, p)] = s_pq.conj();
        h_bounds[(p, q)] = bh;
        h_bounds[(q, p)] = bh;
        s_bounds[(p, q)] = bs;
        s_bounds[(q, p)] = bs;
    }
    for p in 0..m {
        if h[(p, p)].im.abs() > 1e-8 || (s[(p, p)] - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::validation(format!(
                "internal consistency drift at diagonal entry {p}: H_pp = {}, S_pp = {}",
                h[(p, p)],
                s[(p, p)]
            )));
        }
        h[(p, p)] = Complex64::new(h[(p, p)].re, 0.0);
        s[(p, p)] = Complex64::new(s[(p, p)].re, 0.0);
    }

    let pair = KernelPair {
        m,
        h,
        s,
        h_bounds,
        s_bounds,
        provenance: Provenance {
            scheme: "custom".into(),
            t_values: scheme.t_values().to_vec(),
            shot_model: *model,
            hamiltonian_one_norm: hamiltonian.one_norm(),
            n_qubits: n,
        },
    };
    Ok(match model.mode {
        ShotMode::Exact => pair,
        ShotMode::MaxVarianceGaussian => pair.with_shot_noise(model.seed),
    })
}

/// Box-plot summary of ground-state errors over random parameter draws in
/// one range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TRangeSummary {
    pub lo: f64,
    pub hi: f64,
    pub draws: usize,
    /// Per-draw `E_GCM - E_ref` in milliHartree, in draw order.
    pub errors_mha: Vec<f64>,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

impl TRangeSummary {
    fn from_errors(lo: f64, hi: f64, errors_mha: Vec<f64>) -> Self {
        let mut sorted = errors_mha.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
        TRangeSummary {
            lo,
            hi,
            draws: errors_mha.len(),
            min: sorted[0],
            q25: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q75: quantile(&sorted, 0.75),
            max: *sorted.last().expect("non-empty"),
            errors_mha,
        }
    }
}

/// For each range, draws t uniformly per slot, runs the exact pipeline and
/// records `E_GCM - e_reference` in milliHartree; emits box-plot quartiles
/// per range. The expectation cache is shared across draws (the reference
/// state never changes).
#[allow(clippy::too_many_arguments)]
pub fn random_t_experiment(
    scheme: &SamplingScheme,
    hamiltonian: &PauliSum,
    reference: &ReferenceState,
    ranges: &[(f64, f64)],
    draws: usize,
    seed: u64,
    tau: f64,
    e_reference: f64,
) -> Result<Vec<TRangeSummary>> {
    if draws == 0 {
        return Err(Error::validation("need at least one draw"));
    }
    let cache = ExpectationCache::new();
    let model = ShotModel::exact();
    ranges
        .iter()
        .enumerate()
        .map(|(ri, &(lo, hi))| {
            if hi <= lo || !hi.is_finite() || !lo.is_finite() {
                return Err(Error::validation(format!("empty range [{lo},{hi})")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(ri as u64));
            let ts: Vec<Vec<f64>> = (0..draws)
                .map(|_| (0..scheme.n_slots()).map(|_| rng.gen_range(lo..hi)).collect())
                .collect();
            let errors: Vec<f64> = ts
                .par_iter()
                .map(|t| {
                    let pair = assemble_kernels(
                        &scheme.with_t(t.clone())?,
                        hamiltonian,
                        reference,
                        &model,
                        &cache,
                    )?;
                    let sol = pair.solve(tau)?;
                    Ok((sol.ground_energy() - e_reference) * 1e3)
                })
                .collect::<Result<_>>()?;
            Ok(TRangeSummary::from_errors(lo, hi, errors))
        })
        .collect()
}

// --- custom-scheme JSON ---------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FactorRepr {
    /// Complex entries as [re, im] pairs, row-major n_modes x n_modes.
    z: Vec<Vec<[f64; 2]>>,
    sign: f64,
    t_slot: usize,
}

#[derive(Serialize, Deserialize)]
struct ProductRepr {
    label: String,
    #[serde(default)]
    factors: Vec<FactorRepr>,
}

#[derive(Serialize, Deserialize)]
struct SchemeRepr {
    n_modes: usize,
    t_values: Vec<f64>,
    products: Vec<ProductRepr>,
}

impl SamplingScheme {
    pub fn to_json(&self) -> serde_json::Value {
        let repr = SchemeRepr {
            n_modes: self.n_modes,
            t_values: self.t_values.clone(),
            products: self
                .products
                .iter()
                .map(|p| ProductRepr {
                    label: p.label.clone(),
                    factors: p
                        .factors
                        .iter()
                        .map(|f| FactorRepr {
                            z: (0..self.n_modes)
                                .map(|i| {
                                    (0..self.n_modes)
                                        .map(|j| {
                                            let v = f.template.matrix()[(i, j)];
                                            [v.re, v.im]
                                        })
                                        .collect()
                                })
                                .collect(),
                            sign: f.sign,
                            t_slot: f.t_slot,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_value(repr).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let repr: SchemeRepr = serde_json::from_value(value.clone())?;
        if repr.n_modes == 0 || repr.n_modes > 30 {
            return Err(Error::validation("n_modes out of supported range"));
        }
        let products = repr
            .products
            .into_iter()
            .map(|p| {
                let factors = p
                    .factors
                    .into_iter()
                    .map(|f| {
                        if f.z.len() != repr.n_modes
                            || f.z.iter().any(|row| row.len() != repr.n_modes)
                        {
                            return Err(Error::validation(format!(
                                "product {}: generator matrix is not {} x {}",
                                p.label, repr.n_modes, repr.n_modes
                            )));
                        }
                        let z = DMatrix::from_fn(repr.n_modes, repr.n_modes, |i, j| {
                            Complex64::new(f.z[i][j][0], f.z[i][j][1])
                        });
                        Ok(ProductFactor {
                            template: GeneratorMatrix::new(z)?,
                            sign: f.sign,
                            t_slot: f.t_slot,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(GeneratorProduct {
                    label: p.label,
                    factors,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SamplingScheme::new(repr.n_modes, products, repr.t_values)
    }
}
