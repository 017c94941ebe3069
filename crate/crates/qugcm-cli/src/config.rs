//! Run configuration: JSON file plus flag overrides, resolved into one
//! validated value whose hash is embedded in every artifact.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qugcm::simulator::ShotConvention;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianFormat {
    Fcidump,
    PauliJson,
}

impl std::str::FromStr for HamiltonianFormat {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fcidump" => Ok(HamiltonianFormat::Fcidump),
            "pauli-json" => Ok(HamiltonianFormat::PauliJson),
            other => bail!("unknown format '{other}' (expected fcidump or pauli-json)"),
        }
    }
}

/// "h4" or "custom:<path>".
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    H4,
    Custom { path: PathBuf },
}

impl std::str::FromStr for SchemeChoice {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "h4" {
            return Ok(SchemeChoice::H4);
        }
        if let Some(path) = s.strip_prefix("custom:") {
            return Ok(SchemeChoice::Custom { path: path.into() });
        }
        bail!("unknown scheme '{s}' (expected h4 or custom:<path>)")
    }
}

/// Fixed parameter vector or uniform draws from a range.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum TPolicy {
    Fixed { values: Vec<f64> },
    Random { lo: f64, hi: f64, draws: usize },
}

impl std::str::FromStr for TPolicy {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(spec) = s.strip_prefix("random:") {
            let parts: Vec<&str> = spec.split(',').collect();
            if parts.len() != 3 {
                bail!("random t policy is random:<lo>,<hi>,<draws>");
            }
            return Ok(TPolicy::Random {
                lo: parts[0].parse().context("bad lower bound")?,
                hi: parts[1].parse().context("bad upper bound")?,
                draws: parts[2].parse().context("bad draw count")?,
            });
        }
        let values = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().context("bad t value"))
            .collect::<Result<Vec<f64>>>()?;
        Ok(TPolicy::Fixed { values })
    }
}

/// "exact" or a positive shot count.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum ShotsChoice {
    Exact,
    Count(u64),
}

impl std::str::FromStr for ShotsChoice {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(ShotsChoice::Exact);
        }
        let n: u64 = s.parse().context("shots must be 'exact' or a positive integer")?;
        if n == 0 {
            bail!("shot count must be positive");
        }
        Ok(ShotsChoice::Count(n))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub hamiltonian: PathBuf,
    pub format: HamiltonianFormat,
    pub scheme: SchemeChoice,
    pub t: TPolicy,
    pub shots: ShotsChoice,
    pub shot_convention: ShotConvention,
    pub replicates: usize,
    pub seed: Option<u64>,
    pub tau: f64,
    pub out: PathBuf,
    /// Occupied modes of the reference; defaults to the closed-shell
    /// occupation for FCIDUMP sources and must be given for Pauli-JSON
    /// sources used with non-H4 schemes.
    pub reference: Option<Vec<usize>>,
}

/// Partial configuration as read from a file; every field optional so
/// flags can fill the rest.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub hamiltonian: Option<PathBuf>,
    pub format: Option<HamiltonianFormat>,
    pub scheme: Option<SchemeChoice>,
    pub t: Option<TPolicy>,
    pub shots: Option<ShotsChoice>,
    pub shot_convention: Option<ShotConvention>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub tau: Option<f64>,
    pub out: Option<PathBuf>,
    pub reference: Option<Vec<usize>>,
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("cannot parse config {}", path.display()))
    }

    /// Flags win over file values.
    pub fn overlaid(mut self, other: PartialConfig) -> Self {
        macro_rules! take {
            ($field:ident) => {
                if other.$field.is_some() {
                    self.$field = other.$field;
                }
            };
        }
        take!(hamiltonian);
        take!(format);
        take!(scheme);
        take!(t);
        take!(shots);
        take!(shot_convention);
        take!(replicates);
        take!(seed);
        take!(tau);
        take!(out);
        take!(reference);
        self
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let hamiltonian = self
            .hamiltonian
            .context("no Hamiltonian source given (--hamiltonian)")?;
        let format = self.format.unwrap_or(HamiltonianFormat::Fcidump);
        let scheme = self.scheme.unwrap_or(SchemeChoice::H4);
        let t = self.t.unwrap_or(TPolicy::Fixed { values: vec![] });
        let shots = self.shots.unwrap_or(ShotsChoice::Exact);
        let replicates = self.replicates.unwrap_or(1);
        let needs_seed = matches!(t, TPolicy::Random { .. }) || shots != ShotsChoice::Exact;
        if needs_seed && self.seed.is_none() {
            bail!("a seed is required when t draws or finite shots are requested (--seed)");
        }
        if let TPolicy::Random { lo, hi, draws } = &t {
            if hi <= lo || *draws == 0 {
                bail!("random t policy needs lo < hi and draws >= 1");
            }
        }
        if replicates == 0 {
            bail!("replicates must be at least 1");
        }
        Ok(RunConfig {
            hamiltonian,
            format,
            scheme,
            t,
            shots,
            shot_convention: self.shot_convention.unwrap_or(ShotConvention::PerEntry),
            replicates,
            seed: self.seed,
            tau: self.tau.unwrap_or(1e-8),
            out: self.out.unwrap_or_else(|| PathBuf::from("qugcm-out")),
            reference: self.reference,
        })
    }
}

impl RunConfig {
    /// Hash of the canonical JSON form, with the output directory blanked:
    /// it identifies what was computed, not where it landed. Embedded in
    /// artifacts so a run can be replayed bit-identically in exact mode.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = PathBuf::new();
        let canon = serde_json::to_string(&canonical).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = PartialConfig {
            hamiltonian: Some("a.fcidump".into()),
            seed: Some(1),
            tau: Some(1e-6),
            ..Default::default()
        };
        let flags = PartialConfig {
            seed: Some(2),
            ..Default::default()
        };
        let cfg = file.overlaid(flags).resolve().unwrap();
        assert_eq!(cfg.seed, Some(2));
        assert_eq!(cfg.tau, 1e-6);
        assert_eq!(cfg.hamiltonian, PathBuf::from("a.fcidump"));
    }

    #[test]
    fn randomness_requires_seed() {
        let cfg = PartialConfig {
            hamiltonian: Some("a.fcidump".into()),
            t: Some(TPolicy::Random {
                lo: 0.0,
                hi: 1.0,
                draws: 5,
            }),
            ..Default::default()
        };
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn parsers() {
        assert_eq!("exact".parse::<ShotsChoice>().unwrap(), ShotsChoice::Exact);
        assert_eq!("100".parse::<ShotsChoice>().unwrap(), ShotsChoice::Count(100));
        assert!("0".parse::<ShotsChoice>().is_err());
        assert_eq!(
            "random:0,1,20".parse::<TPolicy>().unwrap(),
            TPolicy::Random { lo: 0.0, hi: 1.0, draws: 20 }
        );
        assert_eq!(
            "0.1,0.2".parse::<TPolicy>().unwrap(),
            TPolicy::Fixed { values: vec![0.1, 0.2] }
        );
        assert!(matches!(
            "custom:x.json".parse::<SchemeChoice>().unwrap(),
            SchemeChoice::Custom { .. }
        ));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let base = PartialConfig {
            hamiltonian: Some("a.fcidump".into()),
            ..Default::default()
        };
        let a = base.clone().resolve().unwrap();
        let b = base.clone().resolve().unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = base.resolve().unwrap();
        c.tau = 1e-4;
        assert_ne!(a.hash(), c.hash());
    }
}
