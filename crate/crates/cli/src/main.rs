use std::process::ExitCode;

use clap::Parser;

use selfaffine_cli::{configure_threads, emit, run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = configure_threads()
        .and_then(|()| run(&cli))
        .and_then(|outcome| emit(&cli, outcome, &mut std::io::stdout().lock()));
    match status {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("selfaffine: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
