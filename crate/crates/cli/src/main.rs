use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use noisecorr::experiment::{run, Experiment, ExperimentConfig};

/// Run a noise-correlation experiment and print its report.
///
/// Flags override values from the config file. The exit status is nonzero
/// iff some certificate fails.
#[derive(Parser, Debug)]
#[command(name = "noisecorr", version)]
struct Args {
    /// key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// List experiment names and exit
    #[arg(long)]
    list: bool,
}

fn load(args: &Args) -> Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let mut text =
                std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            if let Some(name) = &args.experiment {
                // The flag wins even when the file names another experiment.
                text.push_str(&format!("\nexperiment = {name}\n"));
            }
            ExperimentConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let name = args.experiment.as_deref().context("either --config or --experiment is required")?;
            ExperimentConfig::new(name.parse()?)
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(tol) = args.tol {
        config.tolerance = tol;
    }
    if let Some(out) = &args.out {
        config.output = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

fn main() -> Result<ExitCode> {
    let args = Args::parse();
    if args.list {
        for e in Experiment::all() {
            println!("{e}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let config = load(&args)?;
    let report = run(&config)?;
    let text = report.render();
    match &config.output {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    eprintln!(
        "{}: {} passed, {} failed in {:.3}s",
        config.experiment,
        report.pass_count(),
        report.fail_count(),
        report.elapsed.as_secs_f64()
    );
    Ok(if report.all_hold() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
