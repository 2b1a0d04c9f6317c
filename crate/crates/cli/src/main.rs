mod config;
mod error;
mod run;

use std::io::Write;
use std::process::ExitCode;

use config::RunConfig;
use error::CliError;

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Clap(_)) => {
            if let CliError::Clap(inner) = &e {
                let _ = inner.print();
            }
            ExitCode::from(e.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn real_main() -> Result<(), CliError> {
    let cfg = RunConfig::from_args(std::env::args_os())?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    let outcome = run::execute(&cfg)?;
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, outcome.report.as_bytes()).map_err(|source| CliError::Output {
                path: path.clone(),
                source,
            })?;
            println!("{}", outcome.summary);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.report.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Output {
                    path: "<stdout>".into(),
                    source,
                })?;
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(())
}
