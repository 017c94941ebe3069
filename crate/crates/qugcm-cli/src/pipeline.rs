//! Shared plumbing between subcommands: problem loading, scheme
//! construction, parameter draws and artifact writing.

use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qugcm::eigensolver::{fci_oracle, SzFilter};
use qugcm::fcidump::read_fcidump;
use qugcm::fermion::{build_hamiltonian, ReferenceState, SpinOrbitalMap};
use qugcm::gcm::{h4_scheme, SamplingScheme};
use qugcm::pauli::PauliSum;

use crate::config::{HamiltonianFormat, RunConfig, SchemeChoice, TPolicy};

/// A Hamiltonian plus everything needed to run and judge the pipeline.
pub struct Problem {
    pub hamiltonian: PauliSum,
    pub reference: ReferenceState,
    /// Sector data for FCI comparison, when the source provides it.
    pub n_electrons: Option<usize>,
    pub alpha_mask: Option<u64>,
}

impl Problem {
    /// Ascending FCI sector spectrum, when the electron count is known.
    pub fn fci_spectrum(&self) -> Result<Option<Vec<f64>>> {
        let Some(n_elec) = self.n_electrons else {
            return Ok(None);
        };
        let sz = self.alpha_mask.map(|alpha_modes| SzFilter {
            two_sz: 0,
            alpha_modes,
        });
        Ok(Some(fci_oracle(&self.hamiltonian, n_elec, sz)?))
    }
}

pub fn load_problem(config: &RunConfig) -> Result<Problem> {
    match config.format {
        HamiltonianFormat::Fcidump => {
            let ints = read_fcidump(&config.hamiltonian)
                .with_context(|| format!("reading {}", config.hamiltonian.display()))?;
            let map = SpinOrbitalMap::blocked(ints.n_spatial(), ints.n_electrons())?;
            let hamiltonian = build_hamiltonian(&ints, &map)?;
            let reference = match &config.reference {
                Some(occ) => ReferenceState::new(2 * ints.n_spatial(), occ.iter().copied())?,
                None => map.reference(ints.n_electrons())?,
            };
            Ok(Problem {
                hamiltonian,
                reference,
                n_electrons: Some(ints.n_electrons()),
                alpha_mask: Some(map.alpha_mask()),
            })
        }
        HamiltonianFormat::PauliJson => {
            let text = std::fs::read_to_string(&config.hamiltonian)
                .with_context(|| format!("reading {}", config.hamiltonian.display()))?;
            let hamiltonian: PauliSum = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", config.hamiltonian.display()))?;
            let occ = match &config.reference {
                Some(occ) => occ.clone(),
                None if hamiltonian.n_qubits() == 8 => vec![0, 1, 2, 3],
                None => bail!(
                    "a Pauli-JSON source on {} qubits needs an explicit reference occupation",
                    hamiltonian.n_qubits()
                ),
            };
            let n_electrons = Some(occ.len());
            let reference = ReferenceState::new(hamiltonian.n_qubits(), occ)?;
            Ok(Problem {
                hamiltonian,
                reference,
                n_electrons,
                alpha_mask: None,
            })
        }
    }
}

/// The scheme template with whatever t-values its source carries; draws
/// replace them later.
pub fn load_scheme(config: &RunConfig) -> Result<SamplingScheme> {
    match &config.scheme {
        SchemeChoice::H4 => Ok(h4_scheme([0.0; 7])),
        SchemeChoice::Custom { path } => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading scheme {}", path.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing scheme {}", path.display()))?;
            Ok(SamplingScheme::from_json(&value)?)
        }
    }
}

/// Expands the t policy into one parameter vector per draw.
pub fn draw_t_vectors(config: &RunConfig, scheme: &SamplingScheme) -> Result<Vec<Vec<f64>>> {
    let n_slots = scheme.n_slots();
    match &config.t {
        TPolicy::Fixed { values } => {
            let values = if values.is_empty() {
                scheme.t_values().to_vec()
            } else {
                values.clone()
            };
            if values.len() != n_slots {
                bail!(
                    "scheme has {n_slots} t-slots but {} values were given",
                    values.len()
                );
            }
            Ok(vec![values])
        }
        TPolicy::Random { lo, hi, draws } => {
            let seed = config.seed.expect("validated at resolve time");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..*draws)
                .map(|_| (0..n_slots).map(|_| rng.gen_range(*lo..*hi)).collect())
                .collect())
        }
    }
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
