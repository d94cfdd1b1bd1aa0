use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hypspeeds_core::runner::{run_to_dir, ExperimentConfig, EXPERIMENTS};

/// Run a hyperbolic-speed experiment from a TOML config.
#[derive(Parser, Debug)]
#[command(name = "hypspeeds", version)]
struct Args {
    /// One of dist, speeds, thm1, thm2, thm3, thm4, hm.
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output` or `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if !EXPERIMENTS.contains(&args.experiment.as_str()) {
        eprintln!("error: unknown experiment `{}`; expected one of {}", args.experiment, EXPERIMENTS.join(", "));
        return ExitCode::from(2);
    }
    let mut config = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    let out = args.out.or_else(|| config.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    match run_to_dir(Some(&args.experiment), &config, &out) {
        Ok(report) if report.pass => {
            println!("{}: pass", report.experiment);
            ExitCode::SUCCESS
        }
        Ok(report) => {
            println!("{}: FAIL", report.experiment);
            for f in &report.failures {
                println!("  {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
