use std::process::ExitCode;

use clap::Parser;
use sfwg::cli::{exit_code, run, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
