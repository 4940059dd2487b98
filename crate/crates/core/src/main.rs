use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emlab::experiments::{run, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "emlab",
    version,
    about = "Euler-Maxwell simulations and dispersive estimate experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// `key = value` configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Extra `key=value` overrides applied after the file
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One Euler-Maxwell run with energy and divergence diagnostics
    Simulate,
    /// The same data over a list of speeds of light
    SweepC,
    /// Space-time norms of shell data and their fitted growth laws
    Strichartz,
    /// Sup-norm decay of the damped dispersive oscillatory integral
    Dispersion,
    /// Damped heat smoothing and maximal regularity ratios
    Heat,
    /// Paraproduct reconstruction and product law checks
    BesovCheck,
    /// Energy balance, dissipation and inequality rows over time intervals
    EnergyReport,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Simulate => ExperimentKind::Simulate,
            Command::SweepC => ExperimentKind::SweepC,
            Command::Strichartz => ExperimentKind::Strichartz,
            Command::Dispersion => ExperimentKind::Dispersion,
            Command::Heat => ExperimentKind::Heat,
            Command::BesovCheck => ExperimentKind::BesovCheck,
            Command::EnergyReport => ExperimentKind::EnergyReport,
        }
    }
}

fn config(cli: &Cli) -> emlab::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_text(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    cfg.kind = cli.command.kind();
    for kv in &cli.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| emlab::EmError::Config(format!("--set expects key=value, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(s) = cli.seed {
        cfg.data.seed = Some(s);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = config(&cli).and_then(|c| run(&c));
    match outcome {
        Ok(o) => {
            println!("{}", o.out_dir.display());
            match o.message {
                Some(m) => {
                    eprintln!("run stopped: {m}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
