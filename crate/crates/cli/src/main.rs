use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lcdt::Error;
use lcdt_cli::commands;
use lcdt_cli::config::RunConfig;

/// Linear canonical Dunkl transforms, spectral-support estimators and verification suites.
#[derive(Parser)]
#[command(name = "lcdt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward transform of the configured function.
    Transform {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One spectral-support estimator.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        which: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verification suite on the built-in corpus.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Thread count comes from the environment only.
const THREADS_VAR: &str = "LCDT_THREADS";

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| Error::param(THREADS_VAR, format!("not a thread count: `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::param(THREADS_VAR, e.to_string()))
}

fn load(path: Option<&PathBuf>) -> Result<RunConfig, Error> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::param("config", format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_json(&text)
        }
    }
}

fn out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn fail(e: &Error) -> ExitCode {
    let body = serde_json::json!({ "error": e.report() });
    eprintln!("{body}");
    match e {
        Error::Parameter { .. } | Error::Format(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    configure_threads()?;
    match cli.command {
        Command::Transform { config, out } => {
            let cfg = load(Some(&config))?;
            for p in commands::transform(&cfg, &out_dir(out, &cfg))? {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Estimate { config, which, out } => {
            let cfg = load(Some(&config))?;
            for p in commands::estimate(&cfg, &which, &out_dir(out, &cfg))? {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, suite, out } => {
            let cfg = load(config.as_ref())?;
            let (report, path) = commands::verify(&cfg, &suite, &out_dir(out, &cfg))?;
            println!("{}", path.display());
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("FAIL {}.{}: {} vs {}", c.suite, c.name, c.value, c.tolerance);
            }
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    run(Cli::parse()).unwrap_or_else(|e| fail(&e))
}
