use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use localis::config::ExperimentConfig;
use localis::io::export_field_csv;
use localis::run::run_experiment;
use localis::verify::run_suite;

/// Operator localization experiments on Euclidean and Heisenberg groups.
#[derive(Parser)]
#[command(name = "localis", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config's "output".
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite: group, function_space, representation,
    /// operator, localization, synthesis or all.
    Verify {
        suite: String,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Convert the binary blocks of a field directory.
    Export {
        dir: PathBuf,
        #[arg(long)]
        csv: bool,
    },
}

enum Status {
    Ok,
    Verdict,
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("LOCALIS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("LOCALIS_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn execute(cli: Cli) -> Result<Status, String> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)
                .map_err(|e| format!("{}: {e}", config.display()))?;
            let outcome = run_experiment(&cfg, out.as_deref()).map_err(|e| e.to_string())?;
            if outcome.verdict {
                println!("ok: results in {}", outcome.output.display());
                Ok(Status::Ok)
            } else {
                println!("verdict failure: results in {}", outcome.output.display());
                Ok(Status::Verdict)
            }
        }
        Command::Verify { suite, report } => {
            let r = run_suite(&suite).map_err(|e| e.to_string())?;
            let json = serde_json::to_string_pretty(&r).map_err(|e| e.to_string())?;
            if let Some(path) = report {
                std::fs::write(&path, format!("{json}\n")).map_err(|e| e.to_string())?;
            }
            println!("{json}");
            Ok(if r.pass { Status::Ok } else { Status::Verdict })
        }
        Command::Export { dir, csv } => {
            if !csv {
                return Err("only CSV export is available; pass --csv".into());
            }
            let files = export_field_csv(&dir).map_err(|e| e.to_string())?;
            println!("wrote {} CSV files in {}", files.len(), dir.display());
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Verdict) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
