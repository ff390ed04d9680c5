use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crformal::error::Error;
use crformal::input::{load_manifold, load_map};
use crformal::report::{analyze_manifold, analyze_map, manifold_text, map_text, to_json, Settings};

/// Exact Segre-set, nondegeneracy and reflection analysis of real-analytic
/// generic submanifolds and formal CR maps.
#[derive(Parser)]
#[command(name = "analyze", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a manifold file: graph form, minimality, nondegeneracy.
    Manifold {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Analyze a formal map between two manifolds.
    Map {
        /// Map file; its `source` and `target` entries are resolved
        /// relative to it.
        path: PathBuf,
        /// Source manifold file, overriding the map file's entry.
        #[arg(long)]
        source: Option<PathBuf>,
        /// Target manifold file, overriding the map file's entry.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Largest |alpha| for the reflection identities.
        #[arg(long, env = "CRFORMAL_ALPHA_MAX", default_value_t = 2)]
        alpha_max: usize,
        /// Jet order for the characteristic variety (default: degree - 2).
        #[arg(long, env = "CRFORMAL_JET_ORDER")]
        jet_order: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Total-degree cap of every series.
    #[arg(long, env = "CRFORMAL_DEGREE", default_value_t = 10)]
    degree: u32,
    /// Seed for the sampled-rank cross-check.
    #[arg(long, env = "CRFORMAL_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, env = "CRFORMAL_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn run(cli: Cli) -> Result<(String, Option<PathBuf>), Error> {
    match cli.command {
        Command::Manifold { path, common } => {
            let settings = Settings { degree: common.degree, seed: common.seed, ..Settings::default() };
            let named = load_manifold(&path, common.degree)?;
            let report = analyze_manifold(&named, &settings)?;
            let body = match common.format {
                Format::Json => to_json(&report),
                Format::Text => manifold_text(&report),
            };
            Ok((body, common.output))
        }
        Command::Map { path, source, target, alpha_max, jet_order, common } => {
            let settings = Settings { degree: common.degree, seed: common.seed, alpha_max, jet_order };
            let loaded = load_map(&path, common.degree, source.as_deref(), target.as_deref())?;
            let report = analyze_map(&loaded, &settings)?;
            let body = match common.format {
                Format::Json => to_json(&report),
                Format::Text => map_text(&report),
            };
            Ok((body, common.output))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((body, None)) => {
            print!("{body}");
            ExitCode::SUCCESS
        }
        Ok((body, Some(path))) => match std::fs::write(&path, body) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::InsufficientCap(_) => 3,
                ref e if e.is_input_error() || matches!(e, Error::Structural(_) | Error::Precondition(_)) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
