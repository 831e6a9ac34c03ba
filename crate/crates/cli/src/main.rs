//! `akasim` command line.
//!
//! Exit codes: 0 success, 1 property violation, 2 usage or configuration
//! error, 3 runtime or I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use akasim::harness::Scenario;
use akasim::Variant;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "akasim",
    version,
    about = "Simulate the 2G-5G AKA protocol family and attacks on it"
)]
pub struct Cli {
    /// Subscriber database file.
    #[arg(long, env = "AKASIM_DB", default_value = "akasim.db", global = true)]
    pub db: PathBuf,

    /// Seed for every random choice the command makes.
    #[arg(long, default_value_t = 1, global = true)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Print raw key bytes instead of fingerprints.
    #[arg(long, global = true)]
    pub reveal_keys: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Table,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Add a subscriber to the database, creating it if needed.
    Provision(ProvisionArgs),
    /// Issue authentication vectors for a subscriber.
    Vectors(VectorsArgs),
    /// Run one honest AKA flow between UE, serving network and home network.
    Run(RunArgs),
    /// Run attack scenarios, singly or as the full matrix.
    Attack(AttackArgs),
    /// Summarise a transcript or evidence file.
    Inspect(InspectArgs),
}

#[derive(Args, Debug, Clone, Default)]
#[group(multiple = false)]
pub struct NetworkArgs {
    /// 4G serving network id as MCC-MNC (e.g. 234-15) or 6 hex digits.
    #[arg(long)]
    pub snid: Option<String>,
    /// Access network identity for EAP-AKA'.
    #[arg(long)]
    pub ani: Option<String>,
    /// 5G serving network name, e.g. 5G:mnc015.mcc234.3gppnetwork.org.
    #[arg(long)]
    pub snn: Option<String>,
}

#[derive(Args, Debug)]
pub struct ProvisionArgs {
    /// 15-digit IMSI.
    #[arg(long)]
    pub imsi: String,
    /// SUPI, defaults to the IMSI.
    #[arg(long)]
    pub supi: Option<String>,
    /// 128-bit K in hex; random from --seed when omitted.
    #[arg(long, requires = "opc")]
    pub k: Option<String>,
    /// 128-bit OPc in hex.
    #[arg(long, requires = "k")]
    pub opc: Option<String>,
    /// Initial home SQN.
    #[arg(long)]
    pub sqn: Option<u64>,
    /// AMF in hex (4 digits).
    #[arg(long, default_value = "0000")]
    pub amf: String,
    /// Comma-separated variants the subscriber may use; all by default.
    #[arg(long, value_delimiter = ',')]
    pub generations: Vec<Variant>,
    /// SQN acceptance window, in steps. Only when creating the database.
    #[arg(long)]
    pub window: Option<u64>,
    /// SQN increment. Only when creating the database.
    #[arg(long)]
    pub step: Option<u64>,
}

#[derive(Args, Debug)]
pub struct VectorsArgs {
    #[arg(long)]
    pub variant: Variant,
    /// Subscriber; the first in the database when omitted.
    #[arg(long)]
    pub imsi: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub count: u32,
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Write the vectors here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub variant: Variant,
    #[arg(long)]
    pub imsi: Option<String>,
    #[command(flatten)]
    pub network: NetworkArgs,
    /// ABBA parameter in hex (5G only).
    #[arg(long, default_value = "0000")]
    pub abba: String,
    /// Write the transcript to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AttackArgs {
    /// Run every scenario against every variant.
    #[arg(long, conflicts_with_all = ["scenario", "variant"])]
    pub matrix: bool,
    #[arg(long, required_unless_present = "matrix")]
    pub scenario: Option<Scenario>,
    #[arg(long, required_unless_present = "matrix")]
    pub variant: Option<Variant>,
    /// Number of consecutive seeds, starting at --seed.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    /// Directory for the report and evidence files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run scenarios one after another instead of in parallel.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    pub path: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                commands::EXIT_USAGE
            } else {
                commands::EXIT_OK
            });
        }
    };
    match commands::dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("akasim: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
