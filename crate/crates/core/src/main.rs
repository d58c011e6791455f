use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use monopulse_track::sim::commands::{codebook_csv, pattern_csv, to_json};
use monopulse_track::sim::{cmd_codebook, cmd_montecarlo, cmd_pattern, cmd_track, Side, SimConfig};
use monopulse_track::Error;

#[derive(Parser, Debug)]
#[command(name = "monotrack", version, about = "Monopulse beam tracking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON simulation config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ArraySide {
    Tx,
    Rx,
}

impl From<ArraySide> for Side {
    fn from(s: ArraySide) -> Self {
        match s {
            ArraySide::Tx => Side::Tx,
            ArraySide::Rx => Side::Rx,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump the beamforming codebook (JSON by default).
    Codebook {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "rx")]
        side: ArraySide,
    },
    /// Beam power patterns in dB relative to N² (CSV by default).
    Pattern {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "rx")]
        side: ArraySide,
        /// Comma-separated beam indices; all beams when omitted.
        #[arg(long, value_delimiter = ',')]
        beams: Option<Vec<usize>>,
        /// Grid points over u ∈ [−1, 1).
        #[arg(long, default_value_t = 1024)]
        points: usize,
    },
    /// Search, then track; CSV trace plus JSON summary.
    Track {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo convergence statistics (JSON).
    Montecarlo {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<SimConfig, Error> {
    let mut cfg = SimConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Codebook { common, side } => {
            let doc = cmd_codebook(&load(&common)?, side.into())?;
            let text = match common.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&doc),
                Format::Csv => codebook_csv(&doc),
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Pattern {
            common,
            side,
            beams,
            points,
        } => {
            let table = cmd_pattern(&load(&common)?, side.into(), beams.as_deref(), points)?;
            let text = match common.format.unwrap_or(Format::Csv) {
                Format::Csv => pattern_csv(&table),
                Format::Json => to_json(&table),
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Track { common } => {
            let output = cmd_track(&load(&common)?)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Json => emit(common.out.as_deref(), &output.json()),
                Format::Csv => {
                    emit(common.out.as_deref(), &output.csv())?;
                    match &common.out {
                        Some(path) => emit(Some(&path.with_extension("summary.json")), &output.summary_json()),
                        None => {
                            eprint!("{}", output.summary_json());
                            Ok(())
                        }
                    }
                }
            }
        }
        Command::Montecarlo { common } => {
            if common.format == Some(Format::Csv) {
                return Err(Error::Config("montecarlo only writes JSON".into()));
            }
            let summary = cmd_montecarlo(&load(&common)?)?;
            emit(common.out.as_deref(), &to_json(&summary))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = if e.exit_code() == 2 { "config" } else { "internal" };
            eprintln!("{}", serde_json::json!({ "error": kind, "message": e.to_string() }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
