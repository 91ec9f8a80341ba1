//! `phc`: command-line front end for the photonic-crystal cavity QED toolkit.
//!
//! Every command reads and writes plain files (JSON, CSV, raw little-endian
//! grids with JSON sidecars, SVG) relative to `--workspace`. Exit status is 0
//! on success, 1 when the numerics fail (divergence, no convergence, failed
//! reproduction rows) and 2 for usage errors.

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{cqed, fdtd, fit, generate, modes, pipeline, plot, reproduce};
use output::Ctx;

#[derive(Debug, Parser)]
#[command(name = "phc", version, about = "Photonic-crystal nanocavity QED toolkit")]
pub struct Cli {
    /// Directory that relative input and output paths are resolved against.
    #[arg(long, global = true, default_value = ".")]
    pub workspace: PathBuf,
    /// Seed for every stochastic step; recorded in output metadata.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (falls back to PHC_THREADS, then all cores).
    #[arg(long, global = true, env = "PHC_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a cavity design file and, optionally, its permittivity grid.
    Generate(generate::Args),
    /// Time-domain simulation.
    #[command(subcommand)]
    Fdtd(fdtd::Cmd),
    /// Resonance extraction and mode volume.
    #[command(subcommand)]
    Modes(modes::Cmd),
    /// Quantum-dot/cavity coupling calculations.
    #[command(subcommand)]
    Cqed(cqed::Cmd),
    /// Multi-peak Voigt fit of a measured spectrum.
    Fit(fit::Args),
    /// Render a CSV produced by another command as SVG.
    Plot(plot::Args),
    /// Recompute published numbers and print a pass/fail table.
    Reproduce(reproduce::Args),
    /// Run a staged pipeline from a config file and write a manifest.
    #[command(subcommand)]
    Pipeline(pipeline::Cmd),
}

/// Failure of the numerics rather than of the invocation.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl std::fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<phc_core::Error>() {
            return if e.is_numerical() { 1 } else { 2 };
        }
        if cause.downcast_ref::<NumericalFailure>().is_some() {
            return 1;
        }
    }
    2
}

pub fn dispatch(ctx: &Ctx, command: Command) -> anyhow::Result<()> {
    match command {
        Command::Generate(a) => generate::run(ctx, a),
        Command::Fdtd(c) => fdtd::run(ctx, c),
        Command::Modes(c) => modes::run(ctx, c),
        Command::Cqed(c) => cqed::run(ctx, c),
        Command::Fit(a) => fit::run(ctx, a),
        Command::Plot(a) => plot::run(ctx, a),
        Command::Reproduce(a) => reproduce::run(ctx, a),
        Command::Pipeline(c) => pipeline::run(ctx, c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Ctx::new(cli.workspace, cli.seed, cli.threads).and_then(|ctx| dispatch(&ctx, cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
