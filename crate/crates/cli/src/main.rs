use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gaugeline_cli::config::{parse_config, RunConfig};
use gaugeline_cli::csvio::resolve_out_dir;
use gaugeline_cli::runs;

/// Instantaneous levels and transient spontaneous-emission spectra of a
/// one-dimensional charged oscillator driven by a passing relativistic
/// charge cluster, in the Lorentz, Coulomb, and multipolar gauges.
#[derive(Parser)]
#[command(name = "gaugeline", version, about)]
struct Cli {
    /// Path to a `key = value` config file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (falls back to config `out_dir`, then
    /// $GAUGELINE_OUT, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker-pool size for omega-grid chunks and sweep points.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Reserved: the pipeline is deterministic and uses no RNG; setting
    /// this flag is rejected.
    #[arg(long, global = true)]
    seedless: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Instantaneous equilibrium, spring constant, and frequency per gauge
    /// over the transit.
    Trajectory,
    /// Adiabaticity parameter r01(t) per gauge.
    Adiabaticity,
    /// Transient emission spectra, peak table, and pairwise peak shifts.
    Spectrum,
    /// Spectra under both background gauges with their difference.
    CompareGauges,
    /// Brute-force validation suite; nonzero exit on any bound violation.
    Oracle,
    /// Cartesian parameter sweep with a deterministic summary.
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.seedless {
        eprintln!(
            "error: --seedless is reserved; the pipeline is deterministic and contains no RNG"
        );
        return ExitCode::from(2);
    }
    let mut cfg: RunConfig = match &cli.config {
        Some(path) => match parse_config(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be >= 1");
            return ExitCode::from(2);
        }
        cfg.workers = w;
    }
    let out = resolve_out_dir(cli.out.as_deref(), cfg.out_dir.as_deref());

    let outcome = match cli.command {
        Command::Trajectory => runs::run_trajectory(&cfg, &out).map(|()| true),
        Command::Adiabaticity => runs::run_adiabaticity(&cfg, &out).map(|()| true),
        Command::Spectrum => runs::run_spectrum(&cfg, &out).map(|_| true),
        Command::CompareGauges => runs::run_compare(&cfg, &out).map(|()| true),
        Command::Oracle => runs::run_oracle(&cfg, &out),
        Command::Sweep => runs::run_sweep(&cfg, &out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks or sweep points failed; see {}", out.display());
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
