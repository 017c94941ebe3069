//! Dense statevector backend: exact Pauli expectations, a concurrent
//! expectation cache keyed by canonical string, and the finite-shot noise
//! model.
//!
//! Expectations of sandwiched operators are evaluated operator-side: the
//! caller expands `V_p^dag O V_q` as a Pauli sum and measures each string
//! against the fixed reference state. The state is never mutated, which is
//! what makes the cache valid: a canonical string determines its
//! expectation for the whole run.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::pauli::{PauliString, PauliSum, QwcGrouping};
use crate::{Error, Result};

/// Dense complex amplitudes over the 2^n computational basis states, unit
/// 2-norm within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n_qubits: usize, amplitudes: DVector<Complex64>) -> Result<Self> {
        if n_qubits > 30 {
            return Err(Error::TooManyQubits(n_qubits));
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                left: 1 << n_qubits,
                right: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "statevector norm {norm} is not 1"
            )));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// The computational basis state with the given bit pattern.
    pub fn basis_state(n_qubits: usize, bits: u64) -> Result<Self> {
        if n_qubits > 30 {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if bits as usize >= dim {
            return Err(Error::validation("basis index out of range"));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[bits as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Applies an operator; the result is a raw amplitude vector with no
    /// normalization contract.
    pub fn apply_operator(&self, s: &PauliSum) -> Result<DVector<Complex64>> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: s.n_qubits(),
            });
        }
        s.apply(&self.amplitudes)
    }

    /// Applies an operator expected to be unitary; errors if the image
    /// drifts off unit norm by more than 1e-10.
    pub fn apply_unitary(&self, s: &PauliSum) -> Result<StateVector> {
        let out = self.apply_operator(s)?;
        let norm = out.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::validation(format!(
                "operator image has norm {norm}; not unitary within 1e-10"
            )));
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amplitudes: out.unscale(norm),
        })
    }

    /// Exact `<state|P|state>` including the string's i^k phase.
    pub fn expect_string(&self, p: &PauliString) -> Result<Complex64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: p.n_qubits(),
            });
        }
        Ok(self.expect_masks(p.x_mask(), p.z_mask()) * p.phase())
    }

    /// Expectation of the Hermitian base string with the given masks.
    fn expect_masks(&self, x: u64, z: u64) -> Complex64 {
        let phases = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        let scale = phases[((x & z).count_ones() & 3) as usize];
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..self.amplitudes.len() as u64 {
            let sign = if (b & z).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            acc += self.amplitudes[(b ^ x) as usize].conj() * self.amplitudes[b as usize] * sign;
        }
        acc * scale
    }

    /// `sum_j h_j <state|P_j|state>`, consulting and updating the cache
    /// per canonical string.
    pub fn expect_sum(
        &self,
        s: &PauliSum,
        cache: &ExpectationCache,
        block: Option<Block>,
    ) -> Result<Complex64> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: s.n_qubits(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for t in s.terms() {
            let base =
                cache.lookup_or_compute(&t.string, block, || self.expect_masks(
                    t.string.x_mask(),
                    t.string.z_mask(),
                ));
            acc += t.coeff * base * t.string.phase();
        }
        Ok(acc)
    }

    /// Cache-free evaluation; used for transparency checks and one-off
    /// expectations.
    pub fn expect_sum_uncached(&self, s: &PauliSum) -> Result<Complex64> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: s.n_qubits(),
            });
        }
        Ok(s
            .terms()
            .iter()
            .map(|t| t.coeff * self.expect_masks(t.string.x_mask(), t.string.z_mask()) * t.string.phase())
            .sum())
    }
}

/// Kernel block a measured string is attributed to in the dedup tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    H,
    S,
}

impl Block {
    fn bit(self) -> u8 {
        match self {
            Block::H => 1,
            Block::S => 2,
        }
    }

    fn index(self) -> usize {
        match self {
            Block::H => 0,
            Block::S => 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct CacheSlot {
    value: Complex64,
    blocks: u8,
}

/// Concurrent map from canonical Pauli string to its expectation against
/// the fixed run state, with duplication tallies per kernel block.
/// Insertions are idempotent (the value is a pure function of the key), so
/// last-writer-wins races are benign.
#[derive(Debug, Default)]
pub struct ExpectationCache {
    values: DashMap<(u64, u64), CacheSlot>,
    hits: AtomicU64,
    misses: AtomicU64,
    totals: [AtomicU64; 2],
    uniques: [AtomicU64; 2],
}

impl ExpectationCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn lookup_or_compute(
        &self,
        string: &PauliString,
        block: Option<Block>,
        compute: impl FnOnce() -> Complex64,
    ) -> Complex64 {
        use dashmap::mapref::entry::Entry;
        let key = (string.x_mask(), string.z_mask());
        let bit = block.map_or(0, Block::bit);
        if let Some(b) = block {
            self.totals[b.index()].fetch_add(1, Ordering::Relaxed);
        }
        match self.values.entry(key) {
            Entry::Occupied(mut e) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                let slot = e.get_mut();
                if bit != 0 && slot.blocks & bit == 0 {
                    slot.blocks |= bit;
                    self.uniques[block.expect("bit nonzero").index()]
                        .fetch_add(1, Ordering::Relaxed);
                }
                slot.value
            }
            Entry::Vacant(v) => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                let value = compute();
                v.insert(CacheSlot { value, blocks: bit });
                if let Some(b) = block {
                    self.uniques[b.index()].fetch_add(1, Ordering::Relaxed);
                }
                value
            }
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    /// Number of distinct strings cached so far.
    pub fn unique_strings(&self) -> usize {
        self.values.len()
    }

    pub fn stats(&self) -> CacheStats {
        let mut blocks = BTreeMap::new();
        let mut grand_total = 0;
        for (name, b) in [("H", Block::H), ("S", Block::S)] {
            let total = self.totals[b.index()].load(Ordering::Relaxed);
            let unique = self.uniques[b.index()].load(Ordering::Relaxed);
            grand_total += total;
            blocks.insert(name.to_string(), BlockStats::new(unique, total));
        }
        blocks.insert(
            "all".to_string(),
            BlockStats::new(self.unique_strings() as u64, grand_total),
        );
        CacheStats { blocks }
    }
}

/// Unique/total tallies per kernel block, mirroring the duplication
/// accounting of the kernel assembly.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BlockStats {
    pub unique: u64,
    pub total: u64,
    pub ratio: f64,
}

impl BlockStats {
    fn new(unique: u64, total: u64) -> Self {
        BlockStats {
            unique,
            total,
            ratio: if total == 0 {
                0.0
            } else {
                unique as f64 / total as f64
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CacheStats {
    #[serde(flatten)]
    pub blocks: BTreeMap<String, BlockStats>,
}

/// How the shot budget of the noise model is interpreted for one kernel
/// entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShotConvention {
    /// `shots` is the total measurement count for the entry.
    PerEntry,
    /// Every QWC group gets `shots` measurements; the entry total is
    /// `shots * n_groups`.
    PerGroup,
}

impl std::str::FromStr for ShotConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-entry" => Ok(ShotConvention::PerEntry),
            "per-group" => Ok(ShotConvention::PerGroup),
            other => Err(Error::validation(format!(
                "unknown shot convention '{other}' (expected per-entry or per-group)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShotMode {
    Exact,
    MaxVarianceGaussian,
}

/// Finite-shot noise model: kernel entries are perturbed by Gaussians at
/// the max-covariance standard-deviation bound. Deterministic under a
/// fixed seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotModel {
    pub mode: ShotMode,
    pub shots: u64,
    pub convention: ShotConvention,
    pub seed: u64,
}

impl ShotModel {
    /// Exact expectations; bounds are still recorded, at one measurement
    /// per entry, so noise replicates can be scaled on afterwards.
    pub fn exact() -> Self {
        ShotModel {
            mode: ShotMode::Exact,
            shots: 1,
            convention: ShotConvention::PerEntry,
            seed: 0,
        }
    }

    pub fn gaussian(shots: u64, convention: ShotConvention, seed: u64) -> Self {
        ShotModel {
            mode: ShotMode::MaxVarianceGaussian,
            shots,
            convention,
            seed,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode == ShotMode::Exact
    }

    /// Total measurements backing one entry with the given group count.
    pub fn entry_shots(&self, n_groups: usize) -> u64 {
        match self.convention {
            ShotConvention::PerEntry => self.shots,
            ShotConvention::PerGroup => self.shots * n_groups.max(1) as u64,
        }
    }
}

/// Per-group 1-norm `sqrt(sum_{i,j in G} |h_i h_j|)`, which collapses to
/// `sum_{i in G} |h_i|`.
fn group_weight(s: &PauliSum, group: &[usize]) -> f64 {
    group.iter().map(|&i| s.terms()[i].coeff.norm()).sum()
}

/// Max-covariance bound on the standard deviation of an entry estimated
/// from `shots` total measurements:
/// `sum_G sqrt(sum_{i,j in G} |h_i h_j|) / sqrt(shots)`.
pub fn shot_bound(s: &PauliSum, grouping: &QwcGrouping, shots: u64) -> f64 {
    let numerator: f64 = grouping
        .groups()
        .iter()
        .map(|g| group_weight(s, g).powi(2).sqrt())
        .sum();
    numerator / (shots.max(1) as f64).sqrt()
}

/// Total measurements needed to reach standard deviation `epsilon` under
/// the max-covariance bound: `(sum_G sqrt(sum |h_i h_j|) / epsilon)^2`,
/// rounded up.
pub fn measurements_needed(s: &PauliSum, grouping: &QwcGrouping, epsilon: f64) -> Result<u64> {
    if epsilon <= 0.0 {
        return Err(Error::validation("epsilon must be positive"));
    }
    let numerator: f64 = grouping
        .groups()
        .iter()
        .map(|g| group_weight(s, g).powi(2).sqrt())
        .sum();
    Ok((numerator / epsilon).powi(2).ceil() as u64)
}

/// Perturbs an exact kernel entry per the model: Gaussian draws with
/// standard deviation `bound` on the real and imaginary parts, or the
/// identity in exact mode. Always consumes two normal draws so that
/// replicate streams stay aligned.
pub fn sample_kernel_entry<R: Rng>(
    exact: Complex64,
    bound: f64,
    mode: ShotMode,
    rng: &mut R,
) -> Complex64 {
    let dre: f64 = StandardNormal.sample(rng);
    let dim: f64 = StandardNormal.sample(rng);
    match mode {
        ShotMode::Exact => exact,
        ShotMode::MaxVarianceGaussian => exact + Complex64::new(dre * bound, dim * bound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliSum;
    use crate::testkit;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = DVector::from_fn(1 << n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let norm = v.norm();
        v /= c(norm, 0.0);
        StateVector::from_amplitudes(n, v).unwrap()
    }

    #[test]
    fn identity_expectation_is_one() {
        let s = random_state(3, 1);
        let id = PauliString::identity(3);
        assert!((s.expect_string(&id).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn z_reads_bits_of_basis_states() {
        let sv = StateVector::basis_state(3, 0b101).unwrap();
        for (q, want) in [(0, -1.0), (1, 1.0), (2, -1.0)] {
            let z = PauliString::single(3, q, 'Z').unwrap();
            let got = sv.expect_string(&z).unwrap();
            assert!((got - c(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn expect_string_matches_dense_oracle() {
        let sv = random_state(4, 7);
        for label in ["XYZI", "ZZXY", "IIIX", "YYYY"] {
            let p: PauliString = label.parse().unwrap();
            let dense = testkit::dense_from_label(label);
            let want = sv.amplitudes().dotc(&(&dense * sv.amplitudes()));
            let got = sv.expect_string(&p).unwrap();
            assert!((got - want).norm() < 1e-12, "{label}: {got} vs {want}");
        }
    }

    #[test]
    fn hermitian_expectations_are_real_and_bounded() {
        let sv = random_state(4, 11);
        for label in ["XIXI", "YZYZ", "ZIII"] {
            let p: PauliString = label.parse().unwrap();
            let v = sv.expect_string(&p).unwrap();
            assert!(v.im.abs() < 1e-14);
            assert!(v.re.abs() <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn empty_sum_expectation_is_zero() {
        let sv = random_state(2, 3);
        let cache = ExpectationCache::new();
        let v = sv.expect_sum(&PauliSum::zero(2), &cache, None).unwrap();
        assert_eq!(v, c(0.0, 0.0));
    }

    #[test]
    fn repeated_sum_is_all_cache_hits() {
        let sv = random_state(3, 5);
        let sum = PauliSum::from_terms(
            3,
            [
                (c(0.5, 0.0), "XYZ".parse().unwrap()),
                (c(0.0, 1.5), "ZZI".parse().unwrap()),
            ],
            0.0,
        )
        .unwrap();
        let cache = ExpectationCache::new();
        let first = sv.expect_sum(&sum, &cache, Some(Block::H)).unwrap();
        assert_eq!(cache.misses(), 2);
        assert_eq!(cache.hits(), 0);
        let second = sv.expect_sum(&sum, &cache, Some(Block::H)).unwrap();
        assert_eq!(cache.misses(), 2);
        assert_eq!(cache.hits(), 2);
        assert!((first - second).norm() < 1e-14);
        let stats = cache.stats();
        assert_eq!(stats.blocks["H"].unique, 2);
        assert_eq!(stats.blocks["H"].total, 4);
        assert_eq!(stats.blocks["all"].unique, 2);
    }

    #[test]
    fn cache_transparency_and_linearity() {
        let sv = random_state(4, 9);
        let a = PauliSum::from_terms(
            4,
            [
                (c(0.3, -0.2), "XYZI".parse().unwrap()),
                (c(1.0, 0.0), "IIZZ".parse().unwrap()),
            ],
            0.0,
        )
        .unwrap();
        let b = PauliSum::from_terms(
            4,
            [
                (c(-0.7, 0.0), "XYZI".parse().unwrap()),
                (c(0.0, 0.4), "YIII".parse().unwrap()),
            ],
            0.0,
        )
        .unwrap();
        let cache = ExpectationCache::new();
        let ca = sv.expect_sum(&a, &cache, Some(Block::S)).unwrap();
        let cb = sv.expect_sum(&b, &cache, Some(Block::S)).unwrap();
        assert!((ca - sv.expect_sum_uncached(&a).unwrap()).norm() < 1e-14);
        assert!((cb - sv.expect_sum_uncached(&b).unwrap()).norm() < 1e-14);

        let alpha = c(0.6, 0.1);
        let beta = c(-0.2, 0.9);
        let combined = a.scale(alpha).add(&b.scale(beta), 0.0).unwrap();
        let lhs = sv.expect_sum_uncached(&combined).unwrap();
        assert!((lhs - (alpha * ca + beta * cb)).norm() < 1e-12);
    }

    #[test]
    fn shot_bound_formula_collapses() {
        // one group, one unit term
        let one = PauliSum::from_terms(1, [(c(1.0, 0.0), "X".parse().unwrap())], 0.0).unwrap();
        let g = one.group_qwc();
        assert_eq!(g.len(), 1);
        assert!((shot_bound(&one, &g, 400) - 1.0 / 20.0).abs() < 1e-15);

        // two singleton groups of unit weight
        let two = PauliSum::from_terms(
            1,
            [(c(1.0, 0.0), "X".parse().unwrap()), (c(1.0, 0.0), "Z".parse().unwrap())],
            0.0,
        )
        .unwrap();
        let g = two.group_qwc();
        assert_eq!(g.len(), 2);
        assert!((shot_bound(&two, &g, 400) - 2.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn measurements_needed_quadratic_law() {
        let one = PauliSum::from_terms(1, [(c(1.0, 0.0), "X".parse().unwrap())], 0.0).unwrap();
        let g = one.group_qwc();
        assert_eq!(measurements_needed(&one, &g, 0.01).unwrap(), 10_000);
        assert_eq!(measurements_needed(&one, &g, 0.02).unwrap(), 2_500);
        assert!(measurements_needed(&one, &g, 0.0).is_err());
        assert!(measurements_needed(&one, &g, -1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_exact_mode_is_identity() {
        let exact = c(0.25, -1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        assert_eq!(
            sample_kernel_entry(exact, 0.3, ShotMode::Exact, &mut rng),
            exact
        );
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let a = sample_kernel_entry(exact, 0.3, ShotMode::MaxVarianceGaussian, &mut r1);
        let b = sample_kernel_entry(exact, 0.3, ShotMode::MaxVarianceGaussian, &mut r2);
        assert_eq!(a, b);
        assert_ne!(a, exact);
    }

    #[test]
    fn sampled_std_tracks_bound() {
        let bound = 0.05;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 2000;
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                sample_kernel_entry(c(1.0, 0.0), bound, ShotMode::MaxVarianceGaussian, &mut rng)
                    .re
                    - 1.0
            })
            .collect();
        let mean: f64 = draws.iter().sum::<f64>() / n as f64;
        let var: f64 = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let std = var.sqrt();
        // std of the sample std is roughly bound/sqrt(2(n-1))
        let sigma_of_std = bound / (2.0 * (n as f64 - 1.0)).sqrt();
        assert!(
            (std - bound).abs() < 3.0 * sigma_of_std,
            "std {std} vs bound {bound}"
        );
    }

    #[test]
    fn entry_shots_conventions() {
        let m = ShotModel::gaussian(100, ShotConvention::PerGroup, 1);
        assert_eq!(m.entry_shots(7), 700);
        let m = ShotModel::gaussian(100, ShotConvention::PerEntry, 1);
        assert_eq!(m.entry_shots(7), 100);
    }
}
