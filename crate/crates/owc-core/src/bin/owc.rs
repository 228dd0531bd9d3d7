//! `owc` command line: build channel databases, analyze bandwidths, and solve
//! allocation scenarios.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use owc_core::allocation::SinrMode;
use owc_core::cli::{cmd_analyze, cmd_build_db, cmd_optimize, AnalyzeCmd, BuildDbCmd, OptimizeCmd};
use owc_core::receivers::ReceiverKind;
use owc_core::Result;

#[derive(Parser)]
#[command(
    name = "owc",
    version,
    about = "Indoor optical wireless channel simulator and resource allocator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace a scene and persist the channel database
    BuildDb {
        /// Scene: `default` (bundled reference room), `fast` (coarse
        /// patches), or a scene JSON path
        #[arg(long, env = "OWC_SCENE", default_value = "default")]
        scene: String,
        /// Receiver front end: adr | imr
        #[arg(long, env = "OWC_RECEIVER")]
        receiver: String,
        /// Output database file
        #[arg(long, env = "OWC_OUT")]
        out: PathBuf,
        /// Impulse-response bin width in seconds
        #[arg(long, env = "OWC_DT", default_value_t = 10e-12)]
        dt: f64,
        /// Highest reflection order to trace: 0 | 1 | 2
        #[arg(long, env = "OWC_ORDERS", default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=2))]
        orders: u8,
        /// Worker threads (default: all cores)
        #[arg(long, env = "OWC_THREADS")]
        threads: Option<usize>,
    },
    /// Compute per-record 3 dB bandwidths and the per-location bandwidth CDF
    Analyze {
        /// Channel database produced by build-db
        #[arg(long, env = "OWC_DB")]
        db: PathBuf,
        /// Output directory (bandwidth.csv, cdf.csv, manifest)
        #[arg(long, env = "OWC_OUT")]
        out: PathBuf,
        /// Worker threads (default: all cores)
        #[arg(long, env = "OWC_THREADS")]
        threads: Option<usize>,
    },
    /// Assign access points, wavelengths and receiver elements to users
    Optimize {
        /// Channel database produced by build-db
        #[arg(long, env = "OWC_DB")]
        db: PathBuf,
        /// Scenario JSON listing user locations
        #[arg(long, env = "OWC_SCENARIO")]
        scenario: PathBuf,
        /// SINR model: linear | squared
        #[arg(long, env = "OWC_SINR_MODE", default_value = "linear")]
        sinr_mode: String,
        /// Output directory (report.csv, manifest)
        #[arg(long, env = "OWC_OUT")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::BuildDb {
            scene,
            receiver,
            out,
            dt,
            orders,
            threads,
        } => cmd_build_db(&BuildDbCmd {
            scene,
            receiver: ReceiverKind::parse(&receiver)?,
            out,
            dt_s: dt,
            max_order: orders,
            threads,
        }),
        Command::Analyze { db, out, threads } => cmd_analyze(&AnalyzeCmd { db, out, threads }),
        Command::Optimize {
            db,
            scenario,
            sinr_mode,
            out,
        } => cmd_optimize(&OptimizeCmd {
            db,
            scenario,
            sinr_mode: SinrMode::parse(&sinr_mode)?,
            out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
