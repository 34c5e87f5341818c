//! Command-line front end for `geocorpus`.
//!
//! [`run`] parses arguments, runs one subcommand and maps the outcome to an
//! exit code: 0 on success, 1 for bad input, 2 for internal failures.
//! Failures are also written to stderr as a single JSON line.

pub mod args;
mod commands;
mod failure;
mod io;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::Cli;
pub use failure::Failure;

use args::Command;

fn dispatch(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Resolve(a) => commands::resolve(a),
        Command::Report(a) => commands::report(a),
        Command::Factors(a) => commands::factors(a),
        Command::Compare(a) => commands::compare(a),
        Command::Regions(a) => commands::regions(a),
        Command::Render(a) => commands::render(a),
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();

    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    let _ = e.print();
                    let message = e.render().to_string();
                    let head = message.split("\n\n").next().unwrap_or_default().trim_start_matches("error: ");
                    let failure = Failure::input("usage", head.split_whitespace().collect::<Vec<_>>().join(" "));
                    eprintln!("{}", failure.to_json_line());
                    1
                }
            };
        }
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            let failure = Failure::internal("thread_pool", e.to_string());
            eprintln!("{}", failure.to_json_line());
            return failure.exit_code();
        }
    };

    match pool.install(|| dispatch(&cli.command)) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("{}", failure.to_json_line());
            failure.exit_code()
        }
    }
}
