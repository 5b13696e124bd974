use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coupled_wave_lab::{execute, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "cwlab", version, about = "Coupled semilinear wave laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file; defaults are used for missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Accepted for compatibility; every computation is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Region map of the (p, q) plane
    Classify,
    /// Direct coupled run
    Simulate,
    /// Picard iteration with contraction monitor
    Picard,
    /// M_k and localized energy diagnostics of a coupled run
    Norms,
    /// Check the decay hypotheses of both background operators
    VerifyBackground,
    /// Parameter sweep over (p, q, amplitude)
    Sweep,
    /// Print the effective configuration and exit
    ShowConfig,
}

fn run(cli: Cli) -> coupled_wave_lab::Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.mode = match cli.command {
        Command::Classify => Mode::Classify,
        Command::Simulate => Mode::Simulate,
        Command::Picard => Mode::Picard,
        Command::Norms => Mode::Norms,
        Command::VerifyBackground => Mode::VerifyBackground,
        Command::Sweep => Mode::Sweep,
        Command::ShowConfig => {
            print!("{}", config.serialize()?);
            return Ok(());
        }
    };
    if let Some(out) = &cli.out {
        config.output.dir = Some(out.display().to_string());
    }
    let output = execute(&config, cli.jobs)?;
    let root = PathBuf::from(config.output.dir.as_deref().unwrap_or("cwlab-out"));
    let dir = output.persist(&root)?;
    let r = &output.record;
    println!("mode      {}", r.mode.label());
    println!("outcome   {}", r.outcome);
    println!("digest    {}", r.digest);
    for (k, v) in &r.summary {
        println!("{k:<9} {v}");
    }
    println!("wall time {:.3} s", r.wall_time.as_secs_f64());
    println!("written   {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cwlab: {e}");
            ExitCode::FAILURE
        }
    }
}
