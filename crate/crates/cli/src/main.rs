mod args;
mod bench;
mod commands;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(anyhow::Error),
}

impl From<qdsp_core::Error> for CliError {
    fn from(e: qdsp_core::Error) -> Self {
        CliError::Run(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, out) = match &cli.command {
        Command::Charfn(a) => (&a.common, commands::charfn as Runner),
        Command::Delta(a) => (&a.common, commands::delta as Runner),
        Command::Crw(a) => (&a.common, commands::crw as Runner),
        Command::AeDemo(a) => (&a.common, commands::ae_demo as Runner),
        Command::Bench(a) => (&a.common, bench::bench as Runner),
    };
    let resolved = common.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = resolved.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Run(anyhow::anyhow!("thread pool: {e}")))?;
    let csv = pool.install(|| out(&cli.command, &resolved))?;
    emit(resolved.output.as_deref(), &csv)
}

type Runner = fn(&Command, &args::Resolved) -> Result<String, CliError>;

/// Writes the finished CSV; files are written to a sibling temporary and
/// renamed so a failed run never leaves a partial file.
fn emit(path: Option<&Path>, csv: &str) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Run(anyhow::anyhow!("cannot write output: {e}"));
    match path {
        None => std::io::stdout().write_all(csv.as_bytes()).map_err(fail),
        Some(p) => {
            let mut tmp = p.as_os_str().to_owned();
            tmp.push(".partial");
            std::fs::write(&tmp, csv).map_err(fail)?;
            std::fs::rename(&tmp, p).map_err(|e| {
                let _ = std::fs::remove_file(&tmp);
                fail(e)
            })
        }
    }
}
