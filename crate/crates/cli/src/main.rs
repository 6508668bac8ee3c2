//! `fracburgers` — command-line driver for the fractional Burgers
//! laboratory.
//!
//! Every subcommand reads one flat `key = value` config file, writes its
//! CSV artifacts and a `summary.txt` into the output directory, and exits
//! with 0 (all checks passed), 2 (a property check failed; artifacts are
//! still written), 3 (configuration error), or 4 (numerical failure).

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use fracburgers::Error;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "fracburgers", version, about = "Fractional Burgers laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Config file (flat `key = value` lines; `#` starts a comment).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the `out` key of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run sweep members in parallel from cold starts instead of
    /// sequentially with warm starts.
    #[arg(long)]
    parallel: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Self-checks of the discrete nonlocal operator.
    OperatorCheck(CommonArgs),
    /// Vanishing-viscosity sweep for the stationary profile.
    Stationary(CommonArgs),
    /// Entropy (Godunov) evolution with slope-bound monitoring.
    Evolve(CommonArgs),
    /// End-to-end non-uniqueness demonstration with certificate.
    NonuniqDemo(CommonArgs),
}

fn run(command: &Command) -> Result<u8, Error> {
    let args = match command {
        Command::OperatorCheck(args)
        | Command::Stationary(args)
        | Command::Evolve(args)
        | Command::NonuniqDemo(args) => args,
    };
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let config = RunConfig::parse(&text)?;
    config.validate()?;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.out_dir));
    std::fs::create_dir_all(&out_dir)?;
    // Archive the canonical form of the config actually used, so every
    // run directory is self-describing.
    std::fs::write(out_dir.join("config_resolved.cfg"), config.render())?;
    match command {
        Command::OperatorCheck(_) => commands::cmd_operator_check(&config, &out_dir),
        Command::Stationary(_) => commands::cmd_stationary(&config, &out_dir, args.parallel),
        Command::Evolve(_) => commands::cmd_evolve(&config, &out_dir, args.parallel),
        Command::NonuniqDemo(_) => commands::cmd_nonuniq_demo(&config, &out_dir, args.parallel),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) => commands::EXIT_CONFIG,
                _ => commands::EXIT_NUMERICAL,
            }
        }
    };
    std::process::exit(code.into());
}
