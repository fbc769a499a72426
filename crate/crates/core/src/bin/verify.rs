use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tricontact::error::{GeomError, Result};
use tricontact::models::{model_by_name, MODEL_NAMES};
use tricontact::verifier::{calibrate_kappa, emit_report, is_config_error, run_suite, SuiteConfig};

/// Numerically verify the 3-structure and cone identities on the built-in models.
#[derive(Parser, Debug)]
#[command(name = "verify", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// flat3, cp3 or cotangent
    #[arg(long)]
    model: Option<String>,
    /// suite name, comma-separated list, or "all"
    #[arg(long)]
    suite: Option<String>,
    /// sample points per chart
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_ad: Option<f64>,
    #[arg(long)]
    tol_fd: Option<f64>,
    /// write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with any of the fields above; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in models
    ListModels,
    /// Determine the exterior-derivative constant κ on the flat model
    Calibrate,
}

fn load_config(cli: &Cli) -> Result<SuiteConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| GeomError::InvalidConfig(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| GeomError::InvalidConfig(format!("{}: {e}", path.display())))?
        }
        None => SuiteConfig::default(),
    };
    if let Some(v) = &cli.model {
        cfg.model = v.clone();
    }
    if let Some(v) = &cli.suite {
        cfg.suite = v.clone();
    }
    if let Some(v) = cli.samples {
        cfg.samples = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.tol_ad {
        cfg.tol_ad = v;
    }
    if let Some(v) = cli.tol_fd {
        cfg.tol_fd = v;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    match cli.command {
        Some(Command::ListModels) => {
            for name in MODEL_NAMES {
                println!("{name}\t{}", model_by_name(name)?.doc);
            }
            Ok(true)
        }
        Some(Command::Calibrate) => {
            println!("{}", serde_json::json!({ "kappa": calibrate_kappa()? }));
            Ok(true)
        }
        None => {
            let cfg = load_config(cli)?;
            let report = run_suite(&cfg)?;
            match &cfg.out {
                Some(path) => emit_report(&report, path)?,
                None => print!("{}", report.to_json()),
            }
            for c in report.failures() {
                eprintln!("FAIL {}: residual {:e} vs threshold {:e}", c.name, c.max_residual, c.threshold);
            }
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
