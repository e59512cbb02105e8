use std::io;
use std::process::ExitCode;

use banded_esd_cli::{configure_threads, execute, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    let result = configure_threads().and_then(|()| execute(&cli, &argv, &mut io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("banded-esd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
