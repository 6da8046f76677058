use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use radsim_core::io::{load_tensor, save_calibration};
use radsim_core::psf::{calibrate, Averaging, MeasureOptions, Truncation};
use serde::Serialize;

use crate::settings::{exec, RadarArgs};

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub radar: RadarArgs,
    /// Glob matching filtered tensor files of a single stationary reflector.
    #[arg(long)]
    pub frames: String,
    /// Energy fraction kept by the measured PSF window.
    #[arg(long, default_value_t = 0.99)]
    pub energy: f64,
    /// Truncate at this multiple of the noise floor instead of by energy.
    #[arg(long, conflicts_with = "energy")]
    pub noise_floor: Option<f64>,
    /// Average magnitudes instead of complex values.
    #[arg(long)]
    pub incoherent: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Serialize)]
struct Summary<'a> {
    out: &'a str,
    frames_averaged: usize,
    window_dims: [usize; 3],
    retained_energy_fraction: f64,
    noise_variance: f64,
}

pub fn run(args: CalibrateArgs) -> Result<()> {
    let cfg = args.radar.resolve(None)?;
    let mut paths: Vec<PathBuf> = glob::glob(&args.frames)
        .with_context(|| format!("bad glob {:?}", args.frames))?
        .collect::<Result<_, _>>()?;
    paths.sort();
    if paths.is_empty() {
        bail!("no files match {:?}", args.frames);
    }
    let frames = paths
        .iter()
        .map(|p| load_tensor(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let opts = MeasureOptions {
        truncation: match args.noise_floor {
            Some(factor) => Truncation::NoiseFloor { factor },
            None => Truncation::Energy(args.energy),
        },
        averaging: if args.incoherent { Averaging::Magnitude } else { Averaging::Coherent },
        exec: exec(args.parallel),
    };
    let bundle = calibrate(&frames, &cfg, &opts)?;
    save_calibration(&args.out, &bundle).with_context(|| format!("writing {}", args.out.display()))?;
    let summary = Summary {
        out: &args.out.to_string_lossy(),
        frames_averaged: bundle.frames_averaged,
        window_dims: bundle.psf.window_dims,
        retained_energy_fraction: bundle.psf.retained_energy_fraction,
        noise_variance: bundle.noise_variance,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
