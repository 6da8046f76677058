//! Runtime comparison of the two pipelines.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RadarConfig;
use crate::conventional::{simulate_conventional_grid, synthesize_grid, MatchFilter};
use crate::error::{Result, SimError};
use crate::exec::Exec;
use crate::fast::{simulate_fast_grid, Placement};
use crate::grid::GridPoint;
use crate::psf::{analytic_psf, truncate_psf, Psf};
use crate::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// Tensor cells.
    pub n_s: usize,
    /// Reflection points.
    pub n_p: usize,
    /// PSF window cells.
    pub n_f: usize,
    /// Received samples per frame (equal to `n_s` for this waveform model).
    pub n_r: usize,
    pub theoretical_ratio: f64,
    pub measured_conventional_s: f64,
    pub measured_fast_s: f64,
    pub measured_ratio: f64,
    pub repetitions: usize,
    pub energy_fraction: f64,
    pub psf_window: [usize; 3],
}

/// `n` on-grid unit-magnitude points with random phase, reproducible from `seed`.
pub fn random_grid_points(dims: [usize; 3], n: usize, seed: u64) -> Vec<GridPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let k = [0, 1, 2].map(|d| rng.random_range(0..dims[d]) as f64);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            GridPoint {
                k,
                amplitude: Complex64::from_polar(1.0, phase),
            }
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn time_median<F: FnMut() -> Result<()>>(repetitions: usize, mut f: F) -> Result<f64> {
    f()?;
    let mut samples = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        f()?;
        samples.push(start.elapsed().as_secs_f64());
    }
    Ok(median(samples))
}

/// The PSF the fast pipeline uses at `energy_fraction` (1 = untruncated).
pub fn benchmark_psf(cfg: &RadarConfig, energy_fraction: f64) -> Result<Psf> {
    truncate_psf(&analytic_psf(cfg)?, energy_fraction)
}

/// Time both pipelines, noiseless, on the same `n_points` random on-grid
/// points. One warm-up run per pipeline, then the median of `repetitions`.
/// PSF construction and FFT planning are excluded from the timings.
pub fn run_benchmark(
    cfg: &RadarConfig,
    n_points: usize,
    repetitions: usize,
    energy_fraction: f64,
    exec: Exec,
) -> Result<ComplexityReport> {
    if repetitions < 3 {
        return Err(SimError::InvalidConfig(format!("repetitions must be >= 3, got {repetitions}")));
    }
    cfg.validate()?;
    let psf = benchmark_psf(cfg, energy_fraction)?;
    let grid = random_grid_points(cfg.dims(), n_points, cfg.rng_seed);
    let filter = MatchFilter::new(cfg)?;
    let dims = cfg.dims();

    let conventional = time_median(repetitions, || {
        let raw = synthesize_grid(&grid, dims, exec);
        std::hint::black_box(filter.apply(&raw, exec)?);
        Ok(())
    })?;
    let fast = time_median(repetitions, || {
        std::hint::black_box(simulate_fast_grid(&grid, &psf, dims, Placement::Nearest, exec)?);
        Ok(())
    })?;

    let n_s = cfg.cell_count();
    let n_f = psf.cell_count();
    Ok(ComplexityReport {
        n_s,
        n_p: n_points,
        n_f,
        n_r: n_s,
        theoretical_ratio: n_s as f64 / n_f as f64,
        measured_conventional_s: conventional,
        measured_fast_s: fast,
        measured_ratio: conventional / fast.max(f64::MIN_POSITIVE),
        repetitions,
        energy_fraction,
        psf_window: psf.window_dims,
    })
}

/// Sanity check that both timed pipelines agree on the benchmark scene.
pub fn benchmark_outputs_agree(cfg: &RadarConfig, n_points: usize) -> Result<f64> {
    let psf = benchmark_psf(cfg, 1.0)?;
    let grid = random_grid_points(cfg.dims(), n_points, cfg.rng_seed);
    let a = simulate_conventional_grid(&grid, cfg, Exec::Sequential)?;
    let b = simulate_fast_grid(&grid, &psf, cfg.dims(), Placement::Nearest, Exec::Sequential)?;
    b.relative_distance(&a)
}
