//! `shrimplab`: sweeps, continuation and return-map checks driven by a
//! `section.key = value` config file.

mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shrimplab::config::KeyValueConfig;
use shrimplab::sweep::write_outputs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "shrimplab", version, about = "Stability windows of homoclinic limit maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (`section.key = value`, `#` comments).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override a config entry; repeatable, later wins.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Sweep worker threads. Output does not depend on it.
    #[arg(long, global = true, env = "SHRIMPLAB_WORKERS")]
    workers: Option<usize>,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Parameter-plane attractor sweep: CSV + PGM.
    Sweep,
    /// Continue one SN or PD curve: curve CSV.
    Continue,
    /// Cusps and degenerate flips on both branches of a curve.
    Codim2,
    /// Distance of rescaled return maps to the limit maps.
    RescaleVerify,
    /// Parameter sequences along which the linear coefficient sweeps its range.
    SequencePlan,
    /// Predicted vs measured splitting parameters of the fold at a fixed limit parameter.
    ShrimpPredict,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Continue => "continue",
            Command::Codim2 => "codim2",
            Command::RescaleVerify => "rescale-verify",
            Command::SequencePlan => "sequence-plan",
            Command::ShrimpPredict => "shrimp-predict",
        }
    }
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<KeyValueConfig, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            KeyValueConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => KeyValueConfig::default(),
    };
    for s in overrides {
        cfg.set(s).map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(cfg)
}

/// `#` lines naming the tool, the command and every resolved key.
fn header(command: Command, cfg: &KeyValueConfig) -> String {
    format!(
        "# shrimplab {} {}\n{}",
        env!("CARGO_PKG_VERSION"),
        command.name(),
        cfg.header("# ")
    )
}

/// Places the header first, or right after the magic line of a PGM.
fn with_header(file: &str, body: &str, header: &str) -> String {
    if file.ends_with(".pgm") {
        let (magic, rest) = body.split_once('\n').unwrap_or((body, ""));
        format!("{magic}\n{header}{rest}")
    } else {
        format!("{header}{body}")
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = load_config(cli.config.as_deref(), &cli.set)?;
    let outputs = match cli.command {
        Command::Sweep => commands::sweep(&mut cfg, cli.workers)?,
        Command::Continue => commands::continuation(&mut cfg)?,
        Command::Codim2 => commands::codim2(&mut cfg)?,
        Command::RescaleVerify => commands::rescale_verify(&mut cfg)?,
        Command::SequencePlan => commands::sequence_plan(&mut cfg)?,
        Command::ShrimpPredict => commands::shrimp_predict(&mut cfg)?,
    };
    let head = header(cli.command, &cfg);
    let files: Vec<(PathBuf, String)> = outputs
        .iter()
        .map(|o| (cli.out.join(&o.file), with_header(&o.file, &o.body, &head)))
        .collect();
    let refs: Vec<(&Path, String)> = files.iter().map(|(p, t)| (p.as_path(), t.clone())).collect();
    write_outputs(&refs, cli.force).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers == Some(0) {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
