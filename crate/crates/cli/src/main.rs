use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = mistfuse_cli::Cli::parse();
    match mistfuse_cli::run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(mistfuse_cli::INPUT_ERROR)
        }
    }
}
