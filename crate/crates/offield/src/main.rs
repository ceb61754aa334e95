use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use offield::{run_experiment, Config, Experiment, ExperimentConfig};

/// Runs one defect ladder and writes results.csv and manifest.txt.
///
/// Exit status: 0 all verdicts pass, 1 some verdict fails, 2 bad config,
/// 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "offield", version)]
struct Args {
    experiment: Experiment,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    let result = Config::load(&args.config).and_then(|config| {
        run_experiment(ExperimentConfig { experiment: args.experiment, config, out: args.out, seed: args.seed, tol: args.tol })
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}: verdict fail", args.experiment.name());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("offield: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
