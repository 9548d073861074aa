use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use ptlab::cli::{configure_threads, execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = configure_threads().and_then(|()| execute(&cli, &mut out));
    let _ = out.flush();
    // Timing goes to stderr so stdout stays reproducible.
    eprintln!("wall_time_secs={:.3}", start.elapsed().as_secs_f64());
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
