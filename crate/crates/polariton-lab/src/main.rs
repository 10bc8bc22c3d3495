//! Thin command-line driver: parse a TOML configuration, run its task, write
//! the outputs and the manifest.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use polariton_lab::config::RunConfig;
use polariton_lab::run::{run, RunOverrides};

#[derive(Parser)]
#[command(
    name = "polariton-lab",
    version,
    about = "Exact diagonalization, propagation and thermal analysis of dipole-coupled cavity QED models"
)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides the config's output.directory).
    #[arg(long)]
    output: Option<PathBuf>,

    /// Task override: spectrum | propagate | surface | thermal_sweep |
    /// gauge_check | instability_scan | collective_scan. The named task must
    /// match the task block in the config; this flag guards scripted runs
    /// against picking up the wrong file.
    #[arg(long)]
    task: Option<String>,

    /// Seed for randomized starting vectors (overrides numerics.seed).
    #[arg(long)]
    seed: Option<u64>,

    /// Worker thread count (default: POLARITON_LAB_THREADS or 1).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> polariton_lab::Result<()> {
    let config = RunConfig::parse(&cli.config)?;
    if let Some(expected) = &cli.task {
        let actual = match &config.task {
            polariton_lab::config::TaskSection::Spectrum { .. } => "spectrum",
            polariton_lab::config::TaskSection::Propagate { .. } => "propagate",
            polariton_lab::config::TaskSection::Surface { .. } => "surface",
            polariton_lab::config::TaskSection::ThermalSweep { .. } => "thermal_sweep",
            polariton_lab::config::TaskSection::GaugeCheck { .. } => "gauge_check",
            polariton_lab::config::TaskSection::InstabilityScan { .. } => "instability_scan",
            polariton_lab::config::TaskSection::CollectiveScan { .. } => "collective_scan",
        };
        if expected != actual {
            return Err(polariton_lab::Error::Config(format!(
                "--task {expected} does not match the config's task '{actual}'"
            )));
        }
    }
    let overrides = RunOverrides {
        output_dir: cli.output.clone(),
        seed: cli.seed,
        threads: cli.threads,
    };
    let manifest = run(&config, &overrides)?;
    println!(
        "{}: wrote {} file(s) to {}",
        manifest.task,
        manifest.files.len(),
        cli.output
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| config.output.directory.clone())
    );
    for f in &manifest.files {
        println!("  {f}");
    }
    Ok(())
}
