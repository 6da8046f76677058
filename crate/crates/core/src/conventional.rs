//! Signal-level reference pipeline: received-signal synthesis followed by the
//! 3D match filter.
//!
//! The transmitted waveform is the separable complex-exponential family, so a
//! scatterer at fractional bin `k` contributes `a * exp(-j2pi n k / N)` along
//! each axis and the match filter reduces to a (windowed) unitary 3D DFT with
//! the opposite sign. An on-grid scatterer therefore lands on its own bin.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::config::RadarConfig;
use crate::error::Result;
use crate::exec::{transpose_blocks, Exec};
use crate::grid::{map_points, GridPoint, ReflectionPoint};
use crate::noise::{add_complex_noise, NoiseDomain};
use crate::tensor::{RadarTensor, TensorKind};

/// `exp(-j 2 pi n k / len)` for `n` in `0..len`.
pub(crate) fn steering_vector(k: f64, len: usize) -> Vec<Complex64> {
    let n_f = len as f64;
    (0..len)
        .map(|n| {
            let cycles = (n as f64 * k).rem_euclid(n_f) / n_f;
            Complex64::from_polar(1.0, -2.0 * PI * cycles)
        })
        .collect()
}

/// Received samples for points already mapped to the grid.
pub fn synthesize_grid(grid: &[GridPoint], dims: [usize; 3], exec: Exec) -> RadarTensor {
    let [nr, nd, na] = dims;
    let vectors: Vec<[Vec<Complex64>; 3]> = grid
        .iter()
        .map(|g| {
            [
                steering_vector(g.k[0], nr),
                steering_vector(g.k[1], nd),
                steering_vector(g.k[2], na),
            ]
        })
        .collect();

    let mut t = RadarTensor::zeros(dims, TensorKind::RawSignal);
    let row_len = t.row_len();
    exec.for_each_chunk(t.cells_mut(), row_len, |n, row| {
        for (g, [er, ed, ea]) in grid.iter().zip(&vectors) {
            let c = g.amplitude * er[n];
            for (m, plane) in row.chunks_exact_mut(na).enumerate() {
                let cm = c * ed[m];
                for (cell, e) in plane.iter_mut().zip(ea) {
                    *cell += cm * e;
                }
            }
        }
    });
    t
}

pub fn synthesize_received(points: &[ReflectionPoint], cfg: &RadarConfig, add_noise: bool) -> Result<RadarTensor> {
    synthesize_received_with(points, cfg, add_noise, Exec::default())
}

pub fn synthesize_received_with(
    points: &[ReflectionPoint],
    cfg: &RadarConfig,
    add_noise: bool,
    exec: Exec,
) -> Result<RadarTensor> {
    cfg.validate()?;
    let grid = map_points(points, cfg)?;
    let mut t = synthesize_grid(&grid, cfg.dims(), exec);
    if add_noise {
        add_complex_noise(&mut t, cfg.noise_variance, cfg.rng_seed, NoiseDomain::Signal, exec);
    }
    Ok(t)
}

/// Planned windowed unitary 3D transform for one grid.
pub struct MatchFilter {
    dims: [usize; 3],
    ffts: [Arc<dyn Fft<f64>>; 3],
    // window / sqrt(len) per axis
    weights: [Vec<f64>; 3],
}

impl std::fmt::Debug for MatchFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatchFilter").field("dims", &self.dims).finish()
    }
}

impl MatchFilter {
    pub fn new(cfg: &RadarConfig) -> Result<Self> {
        cfg.validate()?;
        let dims = cfg.dims();
        let windows = cfg.windows();
        let mut planner = FftPlanner::new();
        // analysis uses exp(+j...), i.e. rustfft's inverse direction
        let ffts = [0, 1, 2].map(|d| planner.plan_fft(dims[d], FftDirection::Inverse));
        let weights = [0, 1, 2].map(|d| {
            let s = (dims[d] as f64).sqrt().recip();
            windows[d]
                .coefficients(dims[d])
                .into_iter()
                .map(|w| w * s)
                .collect()
        });
        Ok(Self { dims, ffts, weights })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    fn transform_lines(&self, axis: usize, data: &mut [Complex64], exec: Exec) {
        let len = self.dims[axis];
        let fft = &self.ffts[axis];
        let weights = &self.weights[axis];
        let scratch_len = fft.get_inplace_scratch_len();
        exec.for_each_chunk_init(
            data,
            len,
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, _, line| {
                for (x, w) in line.iter_mut().zip(weights) {
                    *x *= w;
                }
                fft.process_with_scratch(line, scratch);
            },
        );
    }

    /// Apply the filter to a raw tensor.
    pub fn apply(&self, raw: &RadarTensor, exec: Exec) -> Result<RadarTensor> {
        raw.ensure_kind(TensorKind::RawSignal)?;
        raw.ensure_dims(self.dims)?;
        let [nr, nd, na] = self.dims;
        let mut data = raw.cells().to_vec();
        let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];

        // azimuth: contiguous lines
        self.transform_lines(2, &mut data, exec);

        // Doppler: transpose every (nd x na) plane
        transpose_blocks(exec, &data, &mut scratch, nd, na);
        self.transform_lines(1, &mut scratch, exec);
        transpose_blocks(exec, &scratch, &mut data, na, nd);

        // range: transpose the whole (nr x nd*na) matrix
        transpose_blocks(exec, &data, &mut scratch, nr, nd * na);
        self.transform_lines(0, &mut scratch, exec);
        transpose_blocks(exec, &scratch, &mut data, nd * na, nr);

        RadarTensor::from_cells(self.dims, TensorKind::Filtered, data)
    }
}

pub fn match_filter(raw: &RadarTensor, cfg: &RadarConfig) -> Result<RadarTensor> {
    match_filter_with(raw, cfg, Exec::default())
}

pub fn match_filter_with(raw: &RadarTensor, cfg: &RadarConfig, exec: Exec) -> Result<RadarTensor> {
    raw.ensure_dims(cfg.dims())?;
    MatchFilter::new(cfg)?.apply(raw, exec)
}

pub fn simulate_conventional(points: &[ReflectionPoint], cfg: &RadarConfig, add_noise: bool) -> Result<RadarTensor> {
    simulate_conventional_with(points, cfg, add_noise, Exec::default())
}

pub fn simulate_conventional_with(
    points: &[ReflectionPoint],
    cfg: &RadarConfig,
    add_noise: bool,
    exec: Exec,
) -> Result<RadarTensor> {
    let raw = synthesize_received_with(points, cfg, add_noise, exec)?;
    MatchFilter::new(cfg)?.apply(&raw, exec)
}

/// Noiseless conventional simulation of pre-mapped grid points.
pub fn simulate_conventional_grid(grid: &[GridPoint], cfg: &RadarConfig, exec: Exec) -> Result<RadarTensor> {
    let raw = synthesize_grid(grid, cfg.dims(), exec);
    MatchFilter::new(cfg)?.apply(&raw, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Preset, Window};
    use crate::error::SimError;
    use crate::grid::cell_to_point;

    fn desk() -> RadarConfig {
        RadarConfig::preset(Preset::DeskSmall)
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn empty_scene_is_zero() {
        let cfg = desk();
        let raw = synthesize_received(&[], &cfg, false).unwrap();
        assert_eq!(raw.kind(), TensorKind::RawSignal);
        assert_eq!(raw.energy(), 0.0);
        let y = match_filter(&raw, &cfg).unwrap();
        assert_eq!(y.kind(), TensorKind::Filtered);
        assert_eq!(y.energy(), 0.0);
    }

    #[test]
    fn dc_point_gives_constant_samples() {
        let cfg = desk();
        let raw = synthesize_received(&[ReflectionPoint::new(0.0, 0.0, 0.0, one())], &cfg, false).unwrap();
        for c in raw.cells() {
            assert!((c - one()).norm() < 1e-15);
        }
    }

    #[test]
    fn all_ones_filters_to_single_peak() {
        let cfg = desk();
        let raw = RadarTensor::from_cells(cfg.dims(), TensorKind::RawSignal, vec![one(); cfg.cell_count()]).unwrap();
        let y = match_filter(&raw, &cfg).unwrap();
        assert!((y.get(0, 0, 0) - Complex64::new(256.0, 0.0)).norm() < 1e-9);
        let off_peak = y.cells()[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(off_peak < 1e-9);
    }

    #[test]
    fn on_grid_point_lands_on_its_bin() {
        let cfg = desk();
        let p = cell_to_point([10, 5, 3], one(), &cfg);
        let y = simulate_conventional(&[p], &cfg, false).unwrap();
        let (idx, mag) = y.peak();
        assert_eq!(y.position(idx), [10, 5, 3]);
        assert!((mag - 256.0).abs() < 1e-9);
        let i = y.index(10, 5, 3);
        for (j, c) in y.cells().iter().enumerate() {
            if j != i {
                assert!(c.norm() < 1e-9, "cell {:?} = {c}", y.position(j));
            }
        }
    }

    #[test]
    fn rejects_wrong_kind_and_dims() {
        let cfg = desk();
        let filtered = RadarTensor::zeros(cfg.dims(), TensorKind::Filtered);
        assert!(matches!(match_filter(&filtered, &cfg), Err(SimError::WrongKind { .. })));
        let small = RadarTensor::zeros([4, 4, 4], TensorKind::RawSignal);
        assert!(matches!(match_filter(&small, &cfg), Err(SimError::DimensionMismatch { .. })));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let mut cfg = desk();
        cfg.range_window = Window::Hann;
        let pts: Vec<_> = (0..7)
            .map(|i| ReflectionPoint::new(1.3 + 3.1 * i as f64, -4.0 + 1.1 * i as f64, -0.6 + 0.17 * i as f64, Complex64::new(0.5, 0.1 * i as f64)))
            .collect();
        let a = simulate_conventional_with(&pts, &cfg, true, Exec::Sequential).unwrap();
        let b = simulate_conventional_with(&pts, &cfg, true, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parseval_rectangular() {
        let cfg = desk();
        let pts = [
            ReflectionPoint::new(7.3, 2.0, 0.3, Complex64::new(1.0, -0.5)),
            ReflectionPoint::new(21.9, -6.2, -0.8, Complex64::new(0.2, 0.9)),
        ];
        let raw = synthesize_received(&pts, &cfg, true).unwrap();
        let y = match_filter(&raw, &cfg).unwrap();
        assert!((raw.energy() - y.energy()).abs() / raw.energy() < 1e-9);
    }
}
