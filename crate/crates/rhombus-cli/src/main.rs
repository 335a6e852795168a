//! `rhombus` runs transport experiments on the flux rhombic lattice: exact
//! stationary solutions of the boundary-driven chain, Monte-Carlo estimates
//! for the interacting one, and the Bloch band structure, all emitted as
//! CSV plus a JSON manifest.

mod config;
mod csvout;
mod presets;
mod runner;

use clap::{Parser, Subcommand, ValueEnum};
use config::{Diagnostic, ScenarioConfig, Severity};
use csvout::Table;
use rhombus_core::lattice::bloch_bands;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Anything wrong with the inputs: unreadable or invalid config, bad flags.
const EXIT_CONFIG: u8 = 2;
/// The configuration was valid but a solver failed (divergence, no
/// stationary solution).
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "rhombus", version, about = "Boundary-driven transport on the flux rhombic lattice")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Exact current vs flux for M = 2..7
    Fig2,
    /// Monte-Carlo current vs flux at M = 5, g in {0, 0.7, 2}
    Fig3,
    /// Population staircase at the caging flux, g = 4
    Fig4,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a scenario from a config file or a built-in preset
    Run {
        /// JSON scenario config; mutually exclusive with --preset
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Output directory for preset files (config runs use output_path)
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the Monte-Carlo master seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config file and report diagnostics without running it
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Tabulate the Bloch bands at fixed flux
    Bands {
        /// Flux through each rhomb, radians
        #[arg(long)]
        phi: f64,
        /// Number of quasimomentum samples over [-pi, pi]
        #[arg(long, default_value_t = 256)]
        kpoints: usize,
        /// Hopping amplitude
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run { config, preset, out, seed } => cmd_run(config, preset, &out, seed),
        Cmd::Validate { config } => cmd_validate(&config),
        Cmd::Bands { phi, kpoints, j, out } => cmd_bands(phi, kpoints, j, out.as_deref()),
    }
}

fn cmd_run(config: Option<PathBuf>, preset: Option<Preset>, out: &Path, seed: Option<u64>) -> ExitCode {
    let (mut cfg, preset_name, mut defaulted) = match (&config, preset) {
        (Some(path), None) => match load_config(path) {
            Ok(cfg) => (cfg, None, Vec::new()),
            Err(code) => return code,
        },
        (None, Some(p)) => {
            let (mut cfg, defaulted) = presets::build(p.name()).expect("known preset");
            cfg.output_path = out.join(&cfg.output_path).display().to_string();
            (cfg, Some(p.name()), defaulted)
        }
        _ => {
            eprintln!("error: pass exactly one of --config or --preset");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    if let Some(seed) = seed {
        match cfg.twa.as_mut() {
            Some(twa) => {
                twa.seed = seed;
                defaulted.retain(|d| !d.starts_with("seed"));
            }
            None => eprintln!("note: --seed ignored, the {} scenario is exact", cfg.scenario),
        }
    }
    defaulted.extend(cfg.resolve());

    let diags = config::validate(&cfg);
    print_diagnostics(&diags);
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return ExitCode::from(EXIT_CONFIG);
    }

    match runner::run(&cfg, preset_name, &defaulted) {
        Ok(paths) => {
            let names: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
            println!("wrote {}", names.join(", "));
            ExitCode::SUCCESS
        }
        Err(e @ runner::RunError::Solver(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn cmd_validate(path: &Path) -> ExitCode {
    let mut cfg = match load_config(path) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    cfg.resolve();
    let diags = config::validate(&cfg);
    if diags.is_empty() {
        println!("ok: {} scenario, no findings", cfg.scenario);
        return ExitCode::SUCCESS;
    }
    print_diagnostics(&diags);
    if diags.iter().any(|d| d.severity == Severity::Error) {
        ExitCode::from(EXIT_CONFIG)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_bands(phi: f64, kpoints: usize, j: f64, out: Option<&Path>) -> ExitCode {
    if kpoints < 2 {
        eprintln!("error: --kpoints must be at least 2");
        return ExitCode::from(EXIT_CONFIG);
    }
    let mut table = Table::new(vec!["phi", "kappa", "e_flat", "e_minus", "e_plus"]);
    for kappa in config::linspace(-std::f64::consts::PI, std::f64::consts::PI, kpoints) {
        let (e0, em, ep) = bloch_bands(phi, kappa, j);
        table.row(&[phi.into(), kappa.into(), e0.into(), em.into(), ep.into()]);
    }
    let csv = table.to_csv();
    match out {
        None => {
            print!("{csv}");
            ExitCode::SUCCESS
        }
        Some(path) => match std::fs::write(path, csv) {
            Ok(()) => {
                println!("wrote {}", path.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                ExitCode::from(EXIT_CONFIG)
            }
        },
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })?;
    serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: {} is not a valid scenario config: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })
}

fn print_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}
