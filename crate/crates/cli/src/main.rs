use std::process::ExitCode;

use clap::Parser;
use fhc_cli::Cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match fhc_cli::run(&cli) {
        Ok(report) if report.pass => ExitCode::SUCCESS,
        Ok(report) => {
            eprintln!(
                "{}: FAIL {}",
                report.command,
                report.witness.unwrap_or_default()
            );
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
