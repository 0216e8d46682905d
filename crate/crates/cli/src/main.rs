use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use inner_circle::criteria::Verdict;
use inner_circle_cli::{
    list_families, requested_threads, run_boundary, run_classify, run_verify, with_threads, ExperimentConfig, Format,
    RunManifest,
};

#[derive(Parser)]
#[command(version, about = "Ergodicity and mixing experiments for compositions of inner functions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide ergodicity or mixing from the derivatives at the origin
    Classify(RunArgs),
    /// Monte Carlo experiments on the boundary circle
    Boundary(RunArgs),
    /// Cross-check the boundary simulations against the derivative calculus
    Verify(RunArgs),
    /// List the named families
    ListFamilies {
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured table format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write SVG plots
    #[arg(long)]
    plots: bool,
    /// Exit with status 2 when the verdict is undecided
    #[arg(long)]
    require_decision: bool,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        if let Some(format) = self.format {
            config.output.format = format;
        }
        config.output.plots |= self.plots;
        Ok(config)
    }
}

fn execute(args: &RunArgs, runner: fn(&ExperimentConfig) -> Result<RunManifest>) -> Result<ExitCode> {
    let config = args.config()?;
    let manifest = with_threads(requested_threads()?, || runner(&config))??;
    if let Some(verdict) = manifest.verdict {
        println!("verdict: {}", serde_json::to_string(&verdict)?.trim_matches('"'));
    }
    for check in &manifest.checks {
        let status = if check.passed { "pass" } else { "FAIL" };
        println!("{status} {} {:e} (threshold {:e})", check.name, check.value, check.threshold);
    }
    println!("wrote {}", config.output.dir.join("manifest.json").display());
    if args.require_decision && manifest.verdict == Some(Verdict::Undecided) {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Classify(args) => execute(args, run_classify),
        Cmd::Boundary(args) => execute(args, run_boundary),
        Cmd::Verify(args) => execute(args, run_verify),
        Cmd::ListFamilies { format } => print_families(*format),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn print_families(format: Format) -> Result<ExitCode> {
    let entries = list_families();
    let mut out = std::io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&entries).context("serializing catalog")?)?,
        Format::Csv => {
            writeln!(out, "name,kind,expected")?;
            for e in &entries {
                let expected = serde_json::to_string(&e.expected)?;
                writeln!(out, "{},{},{}", e.name, e.spec.name(), expected.trim_matches('"'))?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
