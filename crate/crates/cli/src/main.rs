use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use canonical_weyl_cli::config::{parse_angles, GridSpec, HamiltonianSpec};
use canonical_weyl_cli::{parse_config, run, CliError, Command, Format, RunConfig};
use clap::Parser;

/// Weyl coefficient estimates for two-dimensional canonical systems.
#[derive(Parser, Debug)]
#[command(name = "canonical-weyl", version)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Envelope parameter q in (0, 1 - 1/sqrt 2).
    #[arg(long)]
    q: Option<f64>,
    /// Certificate target for q_H.
    #[arg(long)]
    eps: Option<f64>,
    /// Geometric grid MIN:MAX:N.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated angles in radians (`pi/4` style accepted).
    #[arg(long)]
    angles: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Use a corpus Hamiltonian by name.
    #[arg(long)]
    hamiltonian: Option<String>,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(q) = cli.q {
        cfg.q = q;
    }
    if let Some(eps) = cli.eps {
        cfg.tolerances.eps = eps;
    }
    if let Some(g) = &cli.grid {
        cfg.grid = GridSpec::parse_flag(g)?;
    }
    if let Some(a) = &cli.angles {
        cfg.angles = parse_angles(a)?;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(p) = &cli.out {
        cfg.output = Some(p.clone());
    }
    if let Some(name) = &cli.hamiltonian {
        cfg.hamiltonian = Some(HamiltonianSpec::Corpus { name: name.clone() });
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let mut out: Box<dyn Write> = match &cfg.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    run(cli.command, &cfg, &mut out, &mut io::stderr())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("canonical-weyl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
