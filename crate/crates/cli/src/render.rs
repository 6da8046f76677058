use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use radsim_core::imaging::{polar_to_cartesian, tensor_to_image, to_decibels, RadarImage};
use radsim_core::io::{load_db_png, load_tensor, save_db_png, save_polar_image};

use crate::settings::RadarArgs;

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub radar: RadarArgs,
    /// Tensor file, or a PNG previously written by this tool.
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Image floor, dB. Defaults to the input image's floor, or -20 for tensors.
    #[arg(long, allow_hyphen_values = true)]
    pub floor_db: Option<f64>,
    /// Resample to a top-down x-y raster with this pixel size, meters.
    #[arg(long, value_name = "PIXEL_M")]
    pub cartesian: Option<f64>,
}

/// dB image in native azimuth order, and its floor.
fn load_image(args: &RenderArgs) -> Result<(RadarImage, f64)> {
    if args.input.extension().is_some_and(|e| e == "png") {
        let (values, side) = load_db_png(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
        let (nr, na) = (side.height, side.width);
        let mut img = RadarImage::zeros(nr, na);
        for r in 0..nr {
            for c in 0..na {
                img.set(r, (c + na - na / 2) % na, values[r * na + c]);
            }
        }
        let floor = args.floor_db.unwrap_or(side.floor_db);
        img.values.iter_mut().for_each(|v| *v = v.max(floor));
        Ok((img, floor))
    } else {
        let t = load_tensor(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
        let floor = args.floor_db.unwrap_or(-20.0);
        Ok((to_decibels(&tensor_to_image(&t)?, floor), floor))
    }
}

pub fn run(args: RenderArgs) -> Result<()> {
    let (img, floor) = load_image(&args)?;
    match args.cartesian {
        None => {
            save_polar_image(&args.out, &img, floor)?;
        }
        Some(pixel_m) => {
            let cfg = args.radar.resolve(None)?;
            let raster = polar_to_cartesian(&img, &cfg, pixel_m)?;
            let values: Vec<f64> = raster
                .values
                .iter()
                .zip(&raster.inside)
                .map(|(&v, &inside)| if inside { v } else { floor })
                .collect();
            save_db_png(&args.out, &values, raster.width, raster.height, floor, "y_far_to_near", "x_left_to_right")?;
        }
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
