//! `decolab`: run model sweeps from a config file and regenerate figure data.
//!
//! Exit status is 0 on a clean run, 1 when outputs were written with
//! validation warnings, and 2 on errors.

mod config;
mod figures;
mod models;
mod output;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use decolab_core::field::HIGH_T_RATIO;
use decolab_core::numerics::QuadratureSettings;

use config::RunConfig;
use figures::{FigureOptions, Form};

#[derive(Parser)]
#[command(name = "decolab", version, about = "Decoherence exponents and density-matrix evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory (falls back to the config's `out`, then $DECOLAB_OUT, then ".").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points.
    #[arg(long)]
    workers: Option<usize>,
    /// Relative tolerance for quadrature and ODE solves.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct Figure {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    #[arg(long, default_value_t = 1.0)]
    cutoff: f64,
    /// T/cutoff in the high-temperature cases.
    #[arg(long, default_value_t = HIGH_T_RATIO)]
    temperature_ratio: f64,
    /// Largest Γt and ΓL on the grid.
    #[arg(long)]
    extent: Option<f64>,
    /// Points per axis.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, value_enum, default_value_t = Form::Corrected)]
    form: Form,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the quantities of a config file over its sweep.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// n = 3 high-temperature D_L(t) on a (t, L) grid.
    Fig1(Figure),
    /// D_L against L at t = 1, 2, 3 (units of 1/cutoff) for all four cases.
    Fig2(Figure),
}

fn output_dir(flag: Option<PathBuf>, from_config: Option<PathBuf>, env: Option<OsString>) -> Result<PathBuf> {
    let dir = flag
        .or(from_config)
        .or_else(|| env.filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn out_env() -> Option<OsString> {
    std::env::var_os("DECOLAB_OUT")
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        anyhow::ensure!(n > 0, "--workers must be positive");
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn figure_options(f: &Figure, extent: f64, resolution: usize) -> FigureOptions {
    let mut quadrature = QuadratureSettings::default();
    if let Some(tol) = f.common.tol {
        quadrature.rel_tol = tol;
    }
    FigureOptions {
        coupling: f.coupling,
        cutoff: f.cutoff,
        temperature_ratio: f.temperature_ratio,
        extent: f.extent.unwrap_or(extent),
        resolution: f.resolution.unwrap_or(resolution),
        form: f.form,
        quadrature,
    }
}

fn execute(cli: Cli) -> Result<usize> {
    match cli.command {
        Command::Run { config, common } => {
            let text =
                std::fs::read_to_string(&config).with_context(|| format!("reading config {}", config.display()))?;
            let parsed = RunConfig::parse(&text).with_context(|| format!("in {}", config.display()))?;
            let out = output_dir(common.out, parsed.out.clone(), out_env())?;
            pool(common.workers)?.install(|| run::execute(&parsed, &config, &out, common.tol))
        }
        Command::Fig1(f) => {
            let out = output_dir(f.common.out.clone(), None, out_env())?;
            let options = figure_options(&f, 10.0, 101);
            pool(f.common.workers)?.install(|| figures::fig1(&options, &out))
        }
        Command::Fig2(f) => {
            let out = output_dir(f.common.out.clone(), None, out_env())?;
            let options = figure_options(&f, 40.0, 801);
            pool(f.common.workers)?.install(|| figures::fig2(&options, &out))
        }
    }
}

fn exit_code(result: &Result<usize>) -> u8 {
    match result {
        Ok(0) => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}

fn main() -> ExitCode {
    let result = execute(Cli::parse());
    match &result {
        Ok(0) => {}
        Ok(n) => eprintln!("decolab: {n} validation warning(s), listed in manifest.txt"),
        Err(e) => eprintln!("error: {e:#}"),
    }
    ExitCode::from(exit_code(&result))
}
