//! `qdtransfer` command-line front end.

mod commands;
mod manifest;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "qdtransfer", version, about = "Photon-to-spin transfer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand that runs a model.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Configuration file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Protocol: `single-spin` or `singlet-triplet` (`st`).
    #[arg(long)]
    pub protocol: Option<String>,
    /// Tunnel coupling, e.g. `150ueV`.
    #[arg(long)]
    pub tc: Option<String>,
    /// Double-dot tunnel coupling, e.g. `50ueV`.
    #[arg(long)]
    pub tdd: Option<String>,
    /// Double-dot detuning, e.g. `-2.03meV`.
    #[arg(long, allow_hyphen_values = true)]
    pub epsdd: Option<String>,
    /// Target Landau-Zener probability, e.g. `1%` or `0.01`.
    #[arg(long)]
    pub plz: Option<String>,
    /// Detuning grid as `start:stop:step`, e.g. `-2meV:250ueV:0.5ueV`.
    #[arg(long, allow_hyphen_values = true, value_parser = commands::parse_grid)]
    pub grid: Option<[String; 3]>,
    /// Extra `key=value` overrides in configuration-file syntax.
    #[arg(long = "set", allow_hyphen_values = true, value_name = "KEY=VALUE", value_parser = commands::parse_assignment)]
    pub set: Vec<(String, String)>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Branch energies, bright content and vertical polarization over the grid.
    Spectrum(ModelArgs),
    /// Full protocol run: failure budget plus sweep, loss and drive datasets.
    Budget(ModelArgs),
    /// Failure budgets over a parameter grid.
    Scan {
        #[command(flatten)]
        model: ModelArgs,
        /// Key to sweep, in configuration-file syntax (e.g. `t_c`).
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. `50ueV,150ueV`.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<String>,
    },
    /// Runs the built-in cross-checks against brute-force propagation.
    Validate {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum(m) => commands::spectrum(&m),
        Command::Budget(m) => commands::budget(&m),
        Command::Scan { model, param, values } => commands::scan(&model, &param, &values),
        Command::Validate { out } => validate::run(&out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
