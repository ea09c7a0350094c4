use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use subspace_ofdm::simcli;

#[derive(Parser)]
#[command(name = "subspace-ofdm", about = "MIMO-OFDM blind channel estimation sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep from a scenario file or a run manifest.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a scenario file.
    Validate { config: PathBuf },
    /// Print the tool version.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    let code = match cli.command {
        Command::Run {
            config,
            out,
            jobs,
            seed,
        } => simcli::run(
            &simcli::RunOptions {
                config,
                out,
                jobs,
                seed,
            },
            &mut stdout,
            &mut stderr,
        ),
        Command::Validate { config } => simcli::validate(&config, &mut stdout, &mut stderr),
        Command::Version => {
            println!("{}", simcli::tool_version());
            simcli::EXIT_OK
        }
    };
    ExitCode::from(code as u8)
}
