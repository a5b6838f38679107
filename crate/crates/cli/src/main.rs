use std::process::ExitCode;

use clap::Parser;
use hdx_cli::pipeline::{run, EXIT_CONFIG};
use hdx_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.config();
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    if let Some(t) = cli.opts.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    match run(&config, &cli.opts.out) {
        Ok(outcome) => {
            for s in outcome.summary["stages"].as_array().into_iter().flatten() {
                eprintln!("{}: {}", s["stage"].as_str().unwrap_or("?"), s["status"].as_str().unwrap_or("?"));
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: cannot write reports to {}: {e}", cli.opts.out.display());
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
