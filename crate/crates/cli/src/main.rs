//! `cve2lib` — link vulnerability descriptions to Maven library coordinates.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.

mod cli;
mod commands;
mod config;
mod error;
mod pipeline;
mod stages;

use clap::Parser;

fn main() {
    let parsed = match cli::Cli::try_parse() {
        Ok(parsed) => parsed,
        Err(e) => {
            // Help and version requests print to stdout and succeed; real
            // argument errors go to stderr and exit 1.
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = commands::dispatch(parsed) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
