//! `radsim`: simulate radar tensors, calibrate PSFs, benchmark and render.

mod calibrate;
mod render;
mod settings;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use radsim_core::bench::run_benchmark;
use radsim_core::fast::compare_tensors;
use radsim_core::io::load_tensor;

use settings::{exec, write_json, RadarArgs};

#[derive(Debug, Parser)]
#[command(name = "radsim", version, about = "Radar tensor simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate scenes and simulate frames.
    Simulate(simulate::SimulateArgs),
    /// Measure a PSF and noise level from recorded reflector frames.
    Calibrate(calibrate::CalibrateArgs),
    /// Time the conventional and fast pipelines against each other.
    Bench(BenchArgs),
    /// Render a tensor or image file to PNG.
    Render(render::RenderArgs),
    /// Compare two tensor files.
    Equivalence(EquivalenceArgs),
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    radar: RadarArgs,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(3..))]
    repetitions: u64,
    #[arg(long, default_value_t = 0.99)]
    energy: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Run both pipelines multi-threaded (throughput, not a fair ratio).
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EquivalenceArgs {
    candidate: PathBuf,
    reference: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn bench(args: BenchArgs) -> Result<()> {
    let cfg = args.radar.resolve(args.seed)?;
    let report = run_benchmark(&cfg, args.points, args.repetitions as usize, args.energy, exec(args.parallel))?;
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn equivalence(args: EquivalenceArgs) -> Result<()> {
    let load = |p: &PathBuf| load_tensor(p).with_context(|| format!("reading {}", p.display()));
    let report = compare_tensors(&load(&args.candidate)?, &load(&args.reference)?)?;
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Calibrate(a) => calibrate::run(a),
        Command::Bench(a) => bench(a),
        Command::Render(a) => render::run(a),
        Command::Equivalence(a) => equivalence(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
