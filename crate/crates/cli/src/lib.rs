//! Command-line front end for Potential Anchoring: dataset readers, config
//! resolution, commands and run manifests.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

use args::Cli;
use config::{read_config_file, Config};
use error::{CliError, Result};

fn run_parsed(cli: Cli) -> Result<String> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let common = cli.command.common();
    let file = common.config.as_deref().map(read_config_file).transpose()?;
    let cfg = Config::resolve(file, cli.command.flags())?;
    let outcome = commands::execute(cli.command.kind(), &common.input, &common.out, &cfg)?;
    Ok(format!("{}\nwrote {}", outcome.summary, common.out.display()))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_parsed(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
