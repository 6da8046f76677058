use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use radsim_core::conventional::simulate_conventional_with;
use radsim_core::fast::{equivalence_report_with, match_gain, simulate_fast_with, Placement};
use radsim_core::imaging::{tensor_to_image, to_decibels};
use radsim_core::io::{load_calibration, save_polar_image, save_tensor, FrameAnnotations};
use radsim_core::psf::{analytic_psf, truncate_psf};
use radsim_core::scene::{assign_amplitudes, generate_scene, AnnotatedScene, SceneSpec};
use radsim_core::{Psf, RadarConfig, RadarTensor};

use crate::settings::{exec, write_json, RadarArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pipeline {
    Fast,
    Conventional,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlacementArg {
    Nearest,
    Splat,
}

impl From<PlacementArg> for Placement {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::Nearest => Placement::Nearest,
            PlacementArg::Splat => Placement::Splat,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub radar: RadarArgs,
    /// Scene spec file (TOML or JSON). Inline flags override its fields.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub cars: Option<usize>,
    #[arg(long)]
    pub poles: Option<usize>,
    /// Clutter objects per 100 m^2.
    #[arg(long)]
    pub clutter_density: Option<f64>,
    #[arg(long, value_enum, default_value = "fast")]
    pub pipeline: Pipeline,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub frames: u64,
    /// Base seed; frame `i` uses `seed + i` for its scene and noise.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the same scene, generated from this seed, in every frame.
    #[arg(long)]
    pub scene_seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Energy fraction kept by the truncated PSF.
    #[arg(long, default_value_t = 0.99)]
    pub energy: f64,
    /// Calibration bundle whose PSF the fast pipeline uses instead of the analytic one.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "nearest")]
    pub placement: PlacementArg,
    #[arg(long)]
    pub no_noise: bool,
    /// Image floor, dB.
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    pub floor_db: f64,
    #[arg(long)]
    pub parallel: bool,
}

fn load_scene_spec(path: &Path) -> Result<SceneSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading scene spec {}", path.display()))?;
    let spec = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)?
    } else {
        toml::from_str(&text)?
    };
    Ok(spec)
}

struct Frame {
    index: u64,
    scene: AnnotatedScene,
    tensors: Vec<(&'static str, RadarTensor)>,
    equivalence: Option<radsim_core::fast::EquivalenceReport>,
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let cfg = args.radar.resolve(args.seed)?;
    let exec = exec(args.parallel);
    let mut spec = match &args.scene {
        Some(p) => load_scene_spec(p)?,
        None => SceneSpec::default(),
    };
    if let Some(n) = args.cars {
        spec.n_cars = n;
    }
    if let Some(n) = args.poles {
        spec.n_poles = n;
    }
    if let Some(d) = args.clutter_density {
        spec.clutter_density = d;
    }
    let wants_fast = args.pipeline != Pipeline::Conventional;
    let wants_conventional = args.pipeline != Pipeline::Fast;
    if !(args.energy > 0.0 && args.energy <= 1.0) {
        bail!("--energy must be in (0, 1], got {}", args.energy);
    }
    let psf = if wants_fast { Some(fast_psf(&args, &cfg)?) } else { None };

    // Everything is simulated in memory before anything is written, so a
    // failing frame leaves no output behind.
    let mut frames = Vec::with_capacity(args.frames as usize);
    for index in 0..args.frames {
        let mut frame_cfg = cfg.clone();
        frame_cfg.rng_seed = cfg.rng_seed.wrapping_add(index);
        let frame_spec = SceneSpec {
            seed: args.scene_seed.unwrap_or(frame_cfg.rng_seed),
            ..spec.clone()
        };
        let scene = generate_scene(&frame_spec, &frame_cfg).with_context(|| format!("frame {index}: scene"))?;
        let scene = assign_amplitudes(&scene, &frame_cfg)?;
        let points = scene.points();
        let noise = !args.no_noise;
        let mut tensors = Vec::new();
        if let Some(psf) = &psf {
            let t = simulate_fast_with(&points, psf, &frame_cfg, noise, args.placement.into(), exec)?;
            tensors.push(("fast", t));
        }
        if wants_conventional {
            tensors.push(("conventional", simulate_conventional_with(&points, &frame_cfg, noise, exec)?));
        }
        let equivalence = if args.pipeline == Pipeline::Both {
            Some(equivalence_report_with(&points, &frame_cfg, args.energy, exec)?)
        } else {
            None
        };
        frames.push(Frame {
            index,
            scene,
            tensors,
            equivalence,
        });
    }

    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    std::fs::write(args.out.join("config.toml"), cfg.to_toml_string())?;
    for frame in &frames {
        write_frame(&args.out, frame, args.floor_db)?;
    }
    eprintln!(
        "wrote {} frame(s) to {} (seed {}, pipeline {:?})",
        frames.len(),
        args.out.display(),
        cfg.rng_seed,
        args.pipeline
    );
    Ok(())
}

fn fast_psf(args: &SimulateArgs, cfg: &RadarConfig) -> Result<Psf> {
    match &args.calibration {
        Some(path) => {
            let bundle = load_calibration(path).with_context(|| format!("loading calibration {}", path.display()))?;
            Ok(match_gain(&bundle.psf, cfg)?)
        }
        None => Ok(truncate_psf(&analytic_psf(cfg)?, args.energy)?),
    }
}

/// Write one frame into a staging directory, then move the files into place.
fn write_frame(out: &Path, frame: &Frame, floor_db: f64) -> Result<()> {
    let stem = format!("frame_{:04}", frame.index);
    let staging = out.join(format!(".{stem}.partial"));
    if staging.exists() {
        std::fs::remove_dir_all(&staging)?;
    }
    std::fs::create_dir_all(&staging)?;
    let result = (|| -> Result<Vec<String>> {
        let mut names = Vec::new();
        let scene_name = format!("{stem}_scene.json");
        std::fs::write(staging.join(&scene_name), frame.scene.to_json() + "\n")?;
        names.push(scene_name);
        let ann_name = format!("{stem}_annotations.json");
        let ann = FrameAnnotations::from_scene(frame.index as usize, &frame.scene);
        std::fs::write(staging.join(&ann_name), ann.to_json() + "\n")?;
        names.push(ann_name);
        for (label, t) in &frame.tensors {
            let tensor_name = format!("{stem}_{label}.rsrt");
            save_tensor(staging.join(&tensor_name), t)?;
            names.push(tensor_name);
            let png_name = format!("{stem}_{label}.png");
            let img = to_decibels(&tensor_to_image(t)?, floor_db);
            save_polar_image(staging.join(&png_name), &img, floor_db)?;
            names.push(format!("{png_name}.json"));
            names.push(png_name);
        }
        if let Some(rep) = &frame.equivalence {
            let name = format!("{stem}_equivalence.json");
            write_json(&staging.join(&name), rep)?;
            names.push(name);
        }
        Ok(names)
    })();
    let names = match result {
        Ok(n) => n,
        Err(e) => {
            let _ = std::fs::remove_dir_all(&staging);
            return Err(e);
        }
    };
    for name in names {
        std::fs::rename(staging.join(&name), out.join(&name))?;
    }
    std::fs::remove_dir(&staging)?;
    Ok(())
}
