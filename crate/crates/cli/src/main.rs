//! `slhnet`: simulate the three-qubit feedback memory, sweep the feedback
//! strength, run the self-check suite, print the Stark-shift table.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use slhnet::lindblad::{density_from_pure, run};
use slhnet::network::{assemble_memory, codeword_state, codeword_with_error, printed, stark_shift_table};
use slhnet::verify::{run_suite, Hooks};

use config::{Overrides, RunConfig};
use output::{csv, sidecar_path, write_file, write_json, RunSummary, Sidecar};

#[derive(Parser)]
#[command(name = "slhnet", version, about = "Autonomous three-qubit memory: SLH network simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one network and write the fidelity trace as CSV.
    Simulate {
        /// Feedback strength Ω.
        #[arg(long)]
        omega: Option<f64>,
        #[command(flatten)]
        flags: Overrides,
    },
    /// Run several feedback strengths in parallel; one CSV each plus a manifest.
    Sweep {
        /// Comma-separated feedback strengths.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        omegas: Option<Vec<f64>>,
        #[command(flatten)]
        flags: Overrides,
    },
    /// Run the self-check suite; exit status 0 only if every check passes.
    Verify {
        /// Corrupt a relay scattering entry to show the unitarity check failing.
        #[arg(long, hide = true)]
        corrupt_relay_sign: bool,
    },
    /// Per-qubit AC Stark shifts for each basis state with parity-matched relays.
    StarkTable {
        /// Scale the shifts by this feedback strength instead of printing units of Ω.
        #[arg(long)]
        omega: Option<f64>,
    },
}

/// Failure classes with their exit codes.
enum Failure {
    Config(anyhow::Error),
    Integration(anyhow::Error),
    Io(anyhow::Error),
    ChecksFailed,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Integration(_) => 3,
            Failure::Io(_) | Failure::ChecksFailed => 1,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { omega, flags } => simulate(omega, &flags),
        Command::Sweep { omegas, flags } => sweep(omegas, &flags),
        Command::Verify { corrupt_relay_sign } => verify(corrupt_relay_sign),
        Command::StarkTable { omega } => {
            stark_table(omega);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(e) => eprintln!("config error: {e:#}"),
                Failure::Integration(e) => eprintln!("integration failed: {e:#}"),
                Failure::Io(e) => eprintln!("error: {e:#}"),
                Failure::ChecksFailed => {}
            }
            ExitCode::from(f.code())
        }
    }
}

/// Run one feedback strength and write its CSV and sidecar. Integration
/// failures still write the partial CSV, flagged in the sidecar.
fn run_point(cfg: &RunConfig, omega: f64, csv_path: &Path) -> Result<RunSummary, Failure> {
    let params = cfg.memory_params(omega);
    let model = assemble_memory(&params).map_err(|e| Failure::Config(e.into()))?;
    let psi0 = codeword_state(cfg.variant);
    let start = match cfg.initial_state.error_qubit() {
        Some(q) => codeword_with_error(cfg.variant, q).map_err(|e| Failure::Config(e.into()))?,
        None => psi0.clone(),
    };
    let rho0 = density_from_pure(&start).map_err(|e| Failure::Config(e.into()))?;
    let outcome = run(&model, &rho0, &cfg.integrator_options(), &psi0)
        .map_err(|e| Failure::Config(e.into()))?;
    let error = outcome.failure.as_ref().map(|e| e.to_string());
    write_file(csv_path, &csv(&outcome.trace)).map_err(Failure::Io)?;
    let summary = RunSummary::new(&outcome.trace, error);
    let sidecar = Sidecar {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        omega,
        alpha: params.alpha,
        run: summary,
    };
    write_json(&sidecar_path(csv_path), &sidecar).map_err(Failure::Io)?;
    Ok(sidecar.run)
}

fn simulate(omega: Option<f64>, flags: &Overrides) -> Result<(), Failure> {
    let mut cfg = flags.resolve().map_err(Failure::Config)?;
    if omega.is_some() {
        cfg.omega = omega;
    }
    cfg.validate().map_err(Failure::Config)?;
    let omega = cfg
        .omega
        .ok_or_else(|| Failure::Config(anyhow!("no feedback strength: pass --omega or set `omega`")))?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| Failure::Config(anyhow!("no output file: pass --out or set `out`")))?;
    match run_point(&cfg, omega, &out)?.error {
        Some(e) => Err(Failure::Integration(anyhow!("{e} (partial CSV kept at {})", out.display()))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct ManifestEntry {
    omega: f64,
    alpha: f64,
    csv: String,
    sidecar: String,
    status: &'static str,
    error: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    gamma_flip: f64,
    variant: String,
    stark_compensated: bool,
    config: &'a RunConfig,
    points: Vec<ManifestEntry>,
}

/// Sorted and deduplicated by exact value.
fn dedup_omegas(list: &[f64]) -> Vec<f64> {
    let mut v = list.to_vec();
    v.sort_by(f64::total_cmp);
    let before = v.len();
    v.dedup();
    if v.len() < before {
        log::warn!("dropped {} duplicate omega value(s)", before - v.len());
    }
    v
}

fn point_file(omega: f64) -> String {
    format!("omega_{omega}.csv")
}

fn sweep(omegas: Option<Vec<f64>>, flags: &Overrides) -> Result<(), Failure> {
    let mut cfg = flags.resolve().map_err(Failure::Config)?;
    if omegas.is_some() {
        cfg.omegas = omegas;
    }
    cfg.validate().map_err(Failure::Config)?;
    let list = cfg
        .omegas
        .clone()
        .ok_or_else(|| Failure::Config(anyhow!("no sweep list: pass --omegas or set `omegas`")))?;
    if list.is_empty() {
        return Err(Failure::Config(anyhow!("sweep list is empty")));
    }
    if let Some(bad) = list.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(Failure::Config(anyhow!("invalid omega {bad}")));
    }
    let list = dedup_omegas(&list);
    let dir: PathBuf = cfg
        .out
        .clone()
        .ok_or_else(|| Failure::Config(anyhow!("no output directory: pass --out or set `out`")))?;
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::Io)?;
    let entries: Vec<ManifestEntry> = list
        .par_iter()
        .map(|&omega| {
            let name = point_file(omega);
            let path = dir.join(&name);
            let sidecar = sidecar_path(Path::new(&name)).display().to_string();
            let alpha = cfg.memory_params(omega).alpha;
            let (status, error) = match run_point(&cfg, omega, &path) {
                Ok(run) if run.complete => ("ok", None),
                Ok(run) => ("failed", run.error),
                Err(f) => (
                    "failed",
                    Some(match f {
                        Failure::Config(e) | Failure::Integration(e) | Failure::Io(e) => format!("{e:#}"),
                        Failure::ChecksFailed => unreachable!("not produced by runs"),
                    }),
                ),
            };
            ManifestEntry {
                omega,
                alpha,
                csv: name,
                sidecar,
                status,
                error,
            }
        })
        .collect();
    let failed = entries.iter().filter(|e| e.status != "ok").count();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        gamma_flip: cfg.gamma_flip,
        variant: cfg.variant.to_string(),
        stark_compensated: cfg.stark_compensated,
        config: &cfg,
        points: entries,
    };
    write_json(&dir.join("manifest.json"), &manifest).map_err(Failure::Io)?;
    if failed > 0 {
        return Err(Failure::Integration(anyhow!("{failed} sweep point(s) failed; see manifest.json")));
    }
    Ok(())
}

fn verify(corrupt_relay_sign: bool) -> Result<(), Failure> {
    let checks = run_suite(&Hooks { corrupt_relay_sign });
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}

fn shift(v: f64, omega: Option<f64>) -> String {
    match omega {
        Some(w) => format!("{:>8}", v * w),
        None if v == 0.0 => format!("{:>8}", "0"),
        None => format!("{:>8}", format!("{v}Ω")),
    }
}

fn stark_table(omega: Option<f64>) {
    println!("Q1,Q2,Q3  R1 R2 |      SS1      SS2      SS3 |    total | printed");
    for (row, (_, _, table)) in stark_shift_table().iter().zip(printed::STARK_TABLE.iter()) {
        let q: Vec<String> = row.qubits.iter().map(char::to_string).collect();
        let mark = if row.shifts == *table {
            "same".to_string()
        } else {
            let p: Vec<String> = table.iter().map(|v| v.to_string()).collect();
            format!("({})", p.join(", "))
        };
        println!(
            "{}     {}  {} | {} {} {} | {} | {mark}",
            q.join(","),
            row.relays[0],
            row.relays[1],
            shift(row.shifts[0], omega),
            shift(row.shifts[1], omega),
            shift(row.shifts[2], omega),
            shift(row.total(), omega),
        );
    }
}
