use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_experiments::summary::write_summary;
use ris_experiments::{run_spec, summarize, Experiment, ExperimentError, ExperimentSpec, RunOptions};

#[derive(Parser)]
#[command(name = "ris-sim", version, about = "Monte Carlo experiments for active-RIS reflect beamforming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec and write CSV plus a JSON manifest.
    Run {
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Mean, standard error and success fraction per sweep point.
    Summarize {
        csv: PathBuf,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a template spec for an experiment.
    GenSpec {
        /// nulling_prob, sumrate_convergence, sumrate_vs_pk, sumrate_vs_budget,
        /// powermin_success or powermin_power
        experiment: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Run {
            spec,
            seed,
            trials,
            workers,
            out_dir,
        } => {
            let bytes = std::fs::read(&spec)?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| ExperimentError::Parse {
                    line: 1,
                    column: 1,
                    message: "spec is not valid UTF-8".into(),
                })?;
            let parsed = ExperimentSpec::from_toml(&text)?;
            let out = run_spec(
                &parsed,
                &bytes,
                &RunOptions {
                    seed,
                    trials,
                    workers,
                    out_dir,
                },
            )?;
            for f in &out.files {
                println!("{}", f.display());
            }
            println!("{}", out.manifest.display());
        }
        Command::Summarize { csv, out } => {
            let rows = summarize(File::open(&csv)?)?;
            match out {
                Some(path) => write_summary(&rows, File::create(path)?)?,
                None => write_summary(&rows, std::io::stdout().lock())?,
            }
        }
        Command::GenSpec { experiment } => {
            let e = Experiment::parse(&experiment).ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                ExperimentError::Schema(format!("unknown experiment {experiment:?}; expected one of {}", names.join(", ")))
            })?;
            print!("{}", ExperimentSpec::template(e).to_toml());
        }
    }
    Ok(())
}
