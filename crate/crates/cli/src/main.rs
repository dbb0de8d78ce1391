use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gop_cli::config::ExperimentConfig;
use gop_cli::{batch, io, measurement_rows, run_file, simulate, summary_line, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "gop", version, about = "Recover sparse eigenfunction expansions from generalized samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its JSON report.
    Run {
        config: PathBuf,
        /// Report path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the simulated (noisy) measurements as CSV.
    Simulate {
        config: PathBuf,
        /// CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every *.toml in a directory.
    Batch {
        dir: PathBuf,
        /// Report directory.
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn simulate_cmd(config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config)?;
    let family = cfg.build_family()?;
    let scheme = cfg.build_scheme(&family)?;
    let meas = simulate(&cfg, &scheme, seed.unwrap_or(cfg.seed))?;
    let rows = measurement_rows(&scheme, &meas)?;
    match out {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            io::write_measurements(std::io::BufWriter::new(f), &rows)
        }
        None => io::write_measurements(std::io::stdout().lock(), &rows),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, seed } => match run_file(&config, &RunOptions { out, seed }) {
            Ok(o) => {
                println!("{}", summary_line(&o));
                o.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::Simulate { config, out, seed } => match simulate_cmd(&config, out.as_deref(), seed) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::Batch { dir, out, seed } => match batch(&dir, &out, seed) {
            Ok(entries) => {
                for e in &entries {
                    match &e.result {
                        Ok(o) => println!("{}", summary_line(o)),
                        Err(err) => println!("{}: error: {err}", e.config.display()),
                    }
                }
                entries.iter().map(|e| e.exit_code()).max().unwrap_or(0)
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code as u8)
}
