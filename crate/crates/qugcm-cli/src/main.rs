//! Batch driver: ingest Hamiltonians, run the generator-coordinate
//! pipeline, sweep noise and parameter settings, and verify the dilation
//! embedding. All artifacts land in per-run directories and embed the
//! resolved config hash, so exact-mode runs replay bit-identically.

mod config;
mod pipeline;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qugcm::dilation::{build_embedding, verify_spectral_property};
use qugcm::eigensolver::{solve_generalized, spectrum_report};
use qugcm::fcidump::read_fcidump;
use qugcm::fermion::{build_hamiltonian, SpinOrbitalMap};
use qugcm::gcm::{assemble_kernels, random_t_experiment, KernelPair};
use qugcm::pauli::PauliSum;
use qugcm::simulator::{ExpectationCache, ShotModel};

use config::{HamiltonianFormat, PartialConfig, RunConfig, SchemeChoice, ShotsChoice, TPolicy};
use pipeline::{draw_t_vectors, load_problem, load_scheme, write_json, write_text, Problem};

#[derive(Parser)]
#[command(name = "qugcm", version, about = "Hybrid generator-coordinate pipeline driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigFlags {
    /// JSON config file; individual flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Hamiltonian source file.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Source format.
    #[arg(long)]
    format: Option<HamiltonianFormat>,
    /// Sampling scheme: h4 or custom:<path>.
    #[arg(long)]
    scheme: Option<SchemeChoice>,
    /// t policy: comma-separated values or random:<lo>,<hi>,<draws>.
    #[arg(long)]
    t: Option<TPolicy>,
    /// Shot budget per entry: a count or "exact".
    #[arg(long)]
    shots: Option<ShotsChoice>,
    /// How the shot budget is counted (per-entry or per-group).
    #[arg(long)]
    shot_convention: Option<qugcm::simulator::ShotConvention>,
    /// Noise replicates per kernel.
    #[arg(long)]
    replicates: Option<usize>,
    /// RNG seed; required whenever draws or shots are randomized.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative overlap threshold for the eigensolver.
    #[arg(long)]
    tau: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Occupied reference modes, e.g. 0,1,2,3.
    #[arg(long, value_delimiter = ',')]
    reference: Option<Vec<usize>>,
}

impl ConfigFlags {
    fn resolve(self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => PartialConfig::load(path)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            hamiltonian: self.hamiltonian,
            format: self.format,
            scheme: self.scheme,
            t: self.t,
            shots: self.shots,
            shot_convention: self.shot_convention,
            replicates: self.replicates,
            seed: self.seed,
            tau: self.tau,
            out: self.out,
            reference: self.reference,
        };
        base.overlaid(flags).resolve()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a Hamiltonian to canonical Pauli-sum JSON and print a
    /// summary.
    Ingest {
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Full pipeline: kernels, eigensolution, spectrum artifacts.
    Run {
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Shot-sweep and t-range experiment data files.
    Experiment {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Which experiment to run.
        #[arg(long, value_parser = ["shot-sweep", "t-ranges"])]
        mode: String,
        /// Shot counts for the sweep, e.g. 100,1000,10000.
        #[arg(long, value_delimiter = ',')]
        shot_counts: Option<Vec<u64>>,
        /// Semicolon-separated t ranges, e.g. "0,1;0,100;100,1000".
        #[arg(long)]
        ranges: Option<String>,
    },
    /// Verify the block-encoding embedding against kernels from a file.
    DilationVerify {
        /// Kernel-pair JSON produced by `run`.
        #[arg(long)]
        kernels: PathBuf,
        /// Target precision in the query-cost model.
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        /// Override for the Hamiltonian 1-norm (defaults to provenance).
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value = "qugcm-out")]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest { flags } => cmd_ingest(flags.resolve()?),
        Command::Run { flags } => cmd_run(flags.resolve()?),
        Command::Experiment {
            flags,
            mode,
            shot_counts,
            ranges,
        } => cmd_experiment(flags.resolve()?, &mode, shot_counts, ranges),
        Command::DilationVerify {
            kernels,
            epsilon,
            alpha,
            out,
        } => cmd_dilation_verify(&kernels, epsilon, alpha, &out),
    }
}

fn cmd_ingest(config: RunConfig) -> Result<()> {
    let hamiltonian = match config.format {
        HamiltonianFormat::Fcidump => {
            let ints = read_fcidump(&config.hamiltonian)
                .with_context(|| format!("reading {}", config.hamiltonian.display()))?;
            let map = SpinOrbitalMap::blocked(ints.n_spatial(), ints.n_electrons())?;
            build_hamiltonian(&ints, &map)?
        }
        HamiltonianFormat::PauliJson => {
            let text = std::fs::read_to_string(&config.hamiltonian)?;
            serde_json::from_str::<PauliSum>(&text)
                .with_context(|| format!("parsing {}", config.hamiltonian.display()))?
        }
    };
    let out = config.out.join("hamiltonian.json");
    write_json(&out, &serde_json::to_value(&hamiltonian)?)?;
    println!(
        "qubits={} terms={} one_norm={:.6}",
        hamiltonian.n_qubits(),
        hamiltonian.len(),
        hamiltonian.one_norm()
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn spectrum_csv(
    draw: usize,
    solution: &qugcm::eigensolver::EigenSolution,
    fci: Option<&[f64]>,
) -> String {
    let report = spectrum_report(solution, fci);
    let mut rows = String::from("draw,level,energy_hartree,omega_ev,delta_vs_reference\n");
    let delta0 = report
        .ground_delta_mha
        .map(|d| format!("{:.6}", d))
        .unwrap_or_default();
    rows.push_str(&format!(
        "{draw},0,{:.12},,{delta0}\n",
        report.ground_energy
    ));
    for (k, omega) in report.excitations_ev.iter().enumerate() {
        let delta = report
            .excitation_deltas_ev
            .get(k)
            .map(|d| format!("{d:.6}"))
            .unwrap_or_default();
        rows.push_str(&format!(
            "{draw},{},{:.12},{omega:.6},{delta}\n",
            k + 1,
            solution.eigenvalues[k + 1]
        ));
    }
    rows
}

fn cmd_run(config: RunConfig) -> Result<()> {
    let problem = load_problem(&config)?;
    let scheme = load_scheme(&config)?;
    let t_vectors = draw_t_vectors(&config, &scheme)?;
    let fci = problem.fci_spectrum()?;
    let cache = ExpectationCache::new();
    let config_hash = config.hash();
    let multi = t_vectors.len() > 1;

    // Exact entries always; when finite shots are requested the bounds are
    // recorded at that budget so replicates just perturb and re-solve.
    let bounds_model = match config.shots {
        ShotsChoice::Exact => ShotModel::exact(),
        ShotsChoice::Count(shots) => ShotModel {
            mode: qugcm::simulator::ShotMode::Exact,
            shots,
            convention: config.shot_convention,
            seed: config.seed.unwrap_or(0),
        },
    };

    let mut summary_draws = Vec::new();
    let mut spectrum_rows = String::new();
    for (draw, t) in t_vectors.iter().enumerate() {
        let scheme_d = scheme.with_t(t.clone())?;
        let pair = assemble_kernels(
            &scheme_d,
            &problem.hamiltonian,
            &problem.reference,
            &bounds_model,
            &cache,
        )?;
        let solution = pair.solve(config.tau)?;
        let dir = if multi {
            config.out.join(format!("draw_{draw:03}"))
        } else {
            config.out.clone()
        };
        let mut kernels_json = pair.to_json();
        kernels_json["provenance"]["config_hash"] = config_hash.clone().into();
        kernels_json["provenance"]["version"] = env!("CARGO_PKG_VERSION").into();
        kernels_json["provenance"]["scheme"] = match &config.scheme {
            SchemeChoice::H4 => "h4".into(),
            SchemeChoice::Custom { path } => format!("custom:{}", path.display()).into(),
        };
        write_json(&dir.join("kernels.json"), &kernels_json)?;
        let (h_csv, s_csv) = pair.to_csv();
        write_text(&dir.join("H.csv"), &h_csv)?;
        write_text(&dir.join("S.csv"), &s_csv)?;
        write_json(
            &dir.join("eigensolution.json"),
            &serde_json::to_value(&solution)?,
        )?;
        spectrum_rows.push_str(&spectrum_csv(draw, &solution, fci.as_deref()));

        if let ShotsChoice::Count(_) = config.shots {
            let seed = config.seed.expect("validated");
            let mut rows = String::from("replicate,seed,e0_hartree,delta_vs_exact_mha\n");
            for rep in 0..config.replicates {
                let rep_seed = seed
                    .wrapping_add(1_000_003u64.wrapping_mul(draw as u64))
                    .wrapping_add(rep as u64);
                let sol = pair.with_shot_noise(rep_seed).solve(config.tau)?;
                rows.push_str(&format!(
                    "{rep},{rep_seed},{:.12},{:.6}\n",
                    sol.ground_energy(),
                    (sol.ground_energy() - solution.ground_energy()) * 1e3
                ));
            }
            write_text(&dir.join("replicates.csv"), &rows)?;
        }

        summary_draws.push(serde_json::json!({
            "draw": draw,
            "t": t,
            "e0_hartree": solution.ground_energy(),
            "retained_dim": solution.retained_dim,
            "delta_vs_fci_mha": fci.as_ref().map(|f| (solution.ground_energy() - f[0]) * 1e3),
        }));
    }
    write_text(&config.out.join("spectrum.csv"), &spectrum_rows)?;
    write_json(
        &config.out.join("cache_stats.json"),
        &serde_json::to_value(cache.stats())?,
    )?;
    let best = summary_draws
        .iter()
        .min_by(|a, b| {
            let ea = a["e0_hartree"].as_f64().expect("set above");
            let eb = b["e0_hartree"].as_f64().expect("set above");
            ea.partial_cmp(&eb).expect("finite energies")
        })
        .cloned();
    write_json(
        &config.out.join("summary.json"),
        &serde_json::json!({
            "config": serde_json::to_value(&config)?,
            "config_hash": config_hash,
            "version": env!("CARGO_PKG_VERSION"),
            "fci_ground": fci.as_ref().map(|f| f[0]),
            "draws": summary_draws,
            "best": best,
        }),
    )?;
    println!("wrote artifacts to {}", config.out.display());
    Ok(())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] * (1.0 - (pos - lo as f64)) + sorted[hi] * (pos - lo as f64)
}

fn cmd_experiment(
    config: RunConfig,
    mode: &str,
    shot_counts: Option<Vec<u64>>,
    ranges: Option<String>,
) -> Result<()> {
    let problem = load_problem(&config)?;
    let scheme = load_scheme(&config)?;
    match mode {
        "shot-sweep" => shot_sweep(&config, &problem, shot_counts),
        "t-ranges" => t_ranges(&config, &problem, &scheme, ranges),
        other => bail!("unknown experiment mode {other}"),
    }
}

fn shot_sweep(config: &RunConfig, problem: &Problem, shot_counts: Option<Vec<u64>>) -> Result<()> {
    let counts = shot_counts
        .unwrap_or_else(|| vec![1_000, 10_000, 100_000, 1_000_000, 10_000_000, 100_000_000]);
    let scheme = load_scheme(config)?;
    let t_vectors = draw_t_vectors(config, &scheme)?;
    let seed = config.seed.context("shot sweep needs --seed")?;
    let fci = problem.fci_spectrum()?;
    let cache = ExpectationCache::new();

    // one exact assembly at unit shots; bounds rescale per sweep point
    let scheme_t = scheme.with_t(t_vectors[0].clone())?;
    let base = assemble_kernels(
        &scheme_t,
        &problem.hamiltonian,
        &problem.reference,
        &ShotModel::exact(),
        &cache,
    )?;
    let exact_e0 = base.solve(config.tau)?.ground_energy();
    let reference_e0 = fci.as_ref().map(|f| f[0]).unwrap_or(exact_e0);

    let mut csv = String::from(
        "shots_per_entry,replicates,mean_err_mha,std_mha,q05,q25,median,q75,q95,within_band_fraction\n",
    );
    for (ci, &shots) in counts.iter().enumerate() {
        let scale = 1.0 / (shots as f64).sqrt();
        let scaled = base.with_scaled_bounds(scale);
        let mut errs: Vec<f64> = Vec::with_capacity(config.replicates);
        for rep in 0..config.replicates {
            let rep_seed = seed
                .wrapping_add(7_777_777u64.wrapping_mul(ci as u64))
                .wrapping_add(rep as u64);
            let sol = scaled.with_shot_noise(rep_seed).solve(config.tau)?;
            errs.push((sol.ground_energy() - reference_e0) * 1e3);
        }
        let mut sorted = errs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let std = (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>()
            / (errs.len().max(2) - 1) as f64)
            .sqrt();
        let within = errs
            .iter()
            .filter(|e| e.abs() <= qugcm::eigensolver::CHEMICAL_ACCURACY_MHA)
            .count() as f64
            / errs.len() as f64;
        csv.push_str(&format!(
            "{shots},{},{mean:.6},{std:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{within:.4}\n",
            errs.len(),
            quantile(&sorted, 0.05),
            quantile(&sorted, 0.25),
            quantile(&sorted, 0.5),
            quantile(&sorted, 0.75),
            quantile(&sorted, 0.95),
        ));
    }
    let path = config.out.join("shot_sweep.csv");
    write_text(&path, &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_ranges(spec: &str) -> Result<Vec<(f64, f64)>> {
    spec.split(';')
        .map(|r| {
            let parts: Vec<&str> = r.split(',').collect();
            if parts.len() != 2 {
                bail!("range must be <lo>,<hi>");
            }
            Ok((parts[0].trim().parse()?, parts[1].trim().parse()?))
        })
        .collect()
}

fn t_ranges(
    config: &RunConfig,
    problem: &Problem,
    scheme: &qugcm::gcm::SamplingScheme,
    ranges: Option<String>,
) -> Result<()> {
    // Default ranges follow the published experiment; the third is a
    // best-effort reading of an ill-formed source range.
    let ranges = match ranges {
        Some(spec) => parse_ranges(&spec)?,
        None => vec![(0.0, 1.0), (0.0, 100.0), (100.0, 1000.0)],
    };
    let draws = match config.t {
        TPolicy::Random { draws, .. } => draws,
        _ => 50,
    };
    let seed = config.seed.context("t-range experiment needs --seed")?;
    let fci = problem
        .fci_spectrum()?
        .context("t-range experiment needs a source with a known electron sector")?;
    let summaries = random_t_experiment(
        scheme,
        &problem.hamiltonian,
        &problem.reference,
        &ranges,
        draws,
        seed,
        config.tau,
        fci[0],
    )?;
    let mut csv = String::from("label,lo,hi,draws,min_mha,q25_mha,median_mha,q75_mha,max_mha\n");
    for s in &summaries {
        let label = if (s.lo, s.hi) == (100.0, 1000.0) {
            format!("{}..{} (best-effort)", s.lo, s.hi)
        } else {
            format!("{}..{}", s.lo, s.hi)
        };
        csv.push_str(&format!(
            "\"{label}\",{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            s.lo, s.hi, s.draws, s.min, s.q25, s.median, s.q75, s.max
        ));
    }
    let path = config.out.join("t_ranges.csv");
    write_text(&path, &csv)?;
    write_json(&config.out.join("t_ranges.json"), &serde_json::to_value(&summaries)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_dilation_verify(
    kernels: &std::path::Path,
    epsilon: f64,
    alpha: Option<f64>,
    out: &std::path::Path,
) -> Result<()> {
    let text = std::fs::read_to_string(kernels)
        .with_context(|| format!("reading {}", kernels.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let pair = KernelPair::from_json(&value)?;
    let alpha = alpha.unwrap_or(pair.provenance().hamiltonian_one_norm);
    if alpha <= 0.0 {
        bail!("the kernel file carries no Hamiltonian 1-norm; pass --alpha");
    }
    let dp = build_embedding(pair.h(), pair.s(), alpha)?;
    let reference = solve_generalized(pair.h(), pair.s(), 0.0)?;
    let report = verify_spectral_property(&dp, &reference, epsilon)?;
    write_json(&out.join("dilation_report.json"), &serde_json::to_value(&report)?)?;
    if let Some(reason) = &report.skipped {
        println!("spectral check skipped: {reason}");
    } else {
        for m in &report.matches {
            println!(
                "E = {:+.6} Ha (scaled {:+.3e}): delta+ = {:.3e}, delta- = {:.3e}, trace residual = {:.3e}",
                m.eigenvalue, m.scaled, m.delta_plus, m.delta_minus, m.trace_residual
            );
        }
    }
    println!(
        "alpha = {alpha:.6}, ||S|| = {:.3e}, ||S^-1|| = {:.3e}, LCU 1-norm = {:.6}, query cost at eps={epsilon:.1e}: {:.3e}",
        report.s_norm, report.s_inv_norm, report.lcu_coefficient_sum, report.query_cost
    );
    println!("wrote {}", out.join("dilation_report.json").display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r = parse_ranges("0,1;0,100;100,1000").unwrap();
        assert_eq!(r, vec![(0.0, 1.0), (0.0, 100.0), (100.0, 1000.0)]);
        assert!(parse_ranges("0;1").is_err());
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
    }

    #[test]
    fn omega_conversion_constant_is_pinned() {
        assert!((qugcm::eigensolver::HARTREE_TO_EV - 27.211386245988).abs() < 1e-12);
    }
}
