//! Point spread function: analytic derivation, truncation, measurement from
//! recorded tensors, and noise-variance estimation.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{RadarConfig, Window};
use crate::error::{Result, SimError};
use crate::exec::Exec;
use crate::tensor::{RadarTensor, TensorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsfSource {
    Analytic,
    Measured,
}

/// A 3D response kernel stored as a window around its peak.
///
/// Cell `o` of the window is the response at shift `o - center_offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Psf {
    pub window_dims: [usize; 3],
    pub cells: Vec<Complex64>,
    pub center_offset: [usize; 3],
    pub retained_energy_fraction: f64,
    pub source: PsfSource,
}

impl Psf {
    #[inline]
    pub fn index(&self, o: [usize; 3]) -> usize {
        (o[0] * self.window_dims[1] + o[1]) * self.window_dims[2] + o[2]
    }

    pub fn get(&self, o: [usize; 3]) -> Complex64 {
        self.cells[self.index(o)]
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn energy(&self) -> f64 {
        self.cells.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn center_value(&self) -> Complex64 {
        self.get(self.center_offset)
    }

    /// Multiply every cell by `s`.
    pub fn rescaled(&self, s: Complex64) -> Psf {
        Psf {
            cells: self.cells.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    /// Scaled so the center cell is exactly 1 + 0j.
    pub fn normalized_to_peak(&self) -> Result<Psf> {
        let c = self.center_value();
        if c.norm() == 0.0 {
            return Err(SimError::DegeneratePsf);
        }
        Ok(self.rescaled(c.inv()))
    }

    /// Number of contiguous cells through the center along `axis` whose
    /// magnitude is within 3 dB of the center cell.
    pub fn main_lobe_width(&self, axis: usize) -> usize {
        let peak = self.center_value().norm();
        let level = peak / 2f64.sqrt();
        let mag = |pos: usize| {
            let mut o = self.center_offset;
            o[axis] = pos;
            self.get(o).norm()
        };
        let c = self.center_offset[axis];
        let mut width = 1;
        let mut i = c;
        while i > 0 && mag(i - 1) >= level {
            width += 1;
            i -= 1;
        }
        let mut i = c;
        while i + 1 < self.window_dims[axis] && mag(i + 1) >= level {
            width += 1;
            i += 1;
        }
        width
    }

    /// Circularly re-center `t` so that cell `peak` sits at the window
    /// center; the window covers the whole tensor.
    pub fn centered_from_tensor(t: &RadarTensor, peak: [usize; 3], source: PsfSource) -> Psf {
        let dims = t.dims();
        let center = dims.map(|n| n / 2);
        let mut cells = Vec::with_capacity(t.len());
        for o0 in 0..dims[0] {
            let r = (peak[0] + dims[0] + o0 - center[0]) % dims[0];
            for o1 in 0..dims[1] {
                let d = (peak[1] + dims[1] + o1 - center[1]) % dims[1];
                for o2 in 0..dims[2] {
                    let a = (peak[2] + dims[2] + o2 - center[2]) % dims[2];
                    cells.push(t.get(r, d, a));
                }
            }
        }
        Psf {
            window_dims: dims,
            cells,
            center_offset: center,
            retained_energy_fraction: 1.0,
            source,
        }
    }
}

/// Filtered response along one axis of a unit scatterer at fractional bin
/// `k`: `K(b) = N^-1/2 sum_n w(n) exp(j 2 pi n (b - k) / N)`.
pub fn axis_kernel(window: Window, n: usize, k: f64) -> Vec<Complex64> {
    let w = window.coefficients(n);
    let norm = (n as f64).sqrt().recip();
    let nf = n as f64;
    (0..n)
        .map(|b| {
            let x = b as f64 - k;
            w.iter()
                .enumerate()
                .map(|(i, wi)| {
                    let cycles = (i as f64 * x).rem_euclid(nf) / nf;
                    Complex64::from_polar(*wi, 2.0 * PI * cycles)
                })
                .sum::<Complex64>()
                * norm
        })
        .collect()
}

/// Closed-form periodic sinc for the rectangular window:
/// `exp(j pi (N-1) x / N) sin(pi x) / (sqrt(N) sin(pi x / N))`.
pub fn dirichlet(n: usize, x: f64) -> Complex64 {
    let nf = n as f64;
    let den = (PI * x / nf).sin();
    let mag = if den.abs() < 1e-14 {
        // removable singularity at x = 0 mod N
        nf.sqrt() * if ((x / nf).round() as i64 * (n as i64 - 1)) % 2 == 0 { 1.0 } else { -1.0 }
    } else {
        (PI * x).sin() / (nf.sqrt() * den)
    };
    Complex64::from_polar(1.0, PI * (nf - 1.0) * x / nf) * mag
}

/// Separable closed-form filtered response of a unit scatterer at fractional
/// grid position `k`.
pub fn kernel_response(cfg: &RadarConfig, k: [f64; 3]) -> Result<RadarTensor> {
    cfg.validate()?;
    let dims = cfg.dims();
    let windows = cfg.windows();
    let kr = axis_kernel(windows[0], dims[0], k[0]);
    let kd = axis_kernel(windows[1], dims[1], k[1]);
    let ka = axis_kernel(windows[2], dims[2], k[2]);
    let mut cells = Vec::with_capacity(cfg.cell_count());
    for r in &kr {
        for d in &kd {
            let rd = r * d;
            for a in &ka {
                cells.push(rd * a);
            }
        }
    }
    RadarTensor::from_cells(dims, TensorKind::Filtered, cells)
}

/// Full-grid PSF of `cfg`: the response of a unit scatterer at the origin,
/// circularly centered.
pub fn analytic_psf(cfg: &RadarConfig) -> Result<Psf> {
    let t = kernel_response(cfg, [0.0; 3])?;
    Ok(Psf::centered_from_tensor(&t, [0, 0, 0], PsfSource::Analytic))
}

/// Inclusive per-axis bounds of a window inside a PSF.
type Bounds = [(usize, usize); 3];

fn slab_energy(energy: &[f64], dims: [usize; 3], b: &Bounds, axis: usize, at: usize) -> f64 {
    let mut r = *b;
    r[axis] = (at, at);
    let mut sum = 0.0;
    for i in r[0].0..=r[0].1 {
        for j in r[1].0..=r[1].1 {
            let base = (i * dims[1] + j) * dims[2];
            sum += energy[base + r[2].0..=base + r[2].1].iter().sum::<f64>();
        }
    }
    sum
}

/// Energy added by growing `axis` one step, and the resulting bounds.
fn growth(energy: &[f64], dims: [usize; 3], b: &Bounds, axis: usize) -> Option<(f64, Bounds)> {
    let (lo, hi) = b[axis];
    let n = dims[axis];
    let mut next = *b;
    if lo > 0 && hi + 1 < n {
        next[axis] = (lo - 1, hi + 1);
        let e = slab_energy(energy, dims, b, axis, lo - 1) + slab_energy(energy, dims, b, axis, hi + 1);
        Some((e, next))
    } else if lo > 0 || hi + 1 < n {
        // one side exhausted: take the rest of the axis
        next[axis] = (0, n - 1);
        let e = (0..lo)
            .chain(hi + 1..n)
            .map(|at| slab_energy(energy, dims, b, axis, at))
            .sum();
        Some((e, next))
    } else {
        None
    }
}

/// Greedy centered window growth until `target` energy is enclosed.
fn grow_window(energy: &[f64], dims: [usize; 3], center: [usize; 3], target: f64) -> Bounds {
    let mut b: Bounds = [0, 1, 2].map(|d| (center[d], center[d]));
    let mut retained = energy[(center[0] * dims[1] + center[1]) * dims[2] + center[2]];
    while retained < target {
        let mut best: Option<(f64, Bounds)> = None;
        for axis in 0..3 {
            if let Some((e, next)) = growth(energy, dims, &b, axis) {
                if best.as_ref().is_none_or(|(be, _)| e > *be) {
                    best = Some((e, next));
                }
            }
        }
        match best {
            Some((e, next)) => {
                retained += e;
                b = next;
            }
            None => break,
        }
    }
    b
}

fn extract(psf: &Psf, b: &Bounds) -> (Vec<Complex64>, [usize; 3], [usize; 3]) {
    let dims = [0, 1, 2].map(|d| b[d].1 - b[d].0 + 1);
    let mut cells = Vec::with_capacity(dims.iter().product());
    for i in b[0].0..=b[0].1 {
        for j in b[1].0..=b[1].1 {
            for k in b[2].0..=b[2].1 {
                cells.push(psf.get([i, j, k]));
            }
        }
    }
    let center = [0, 1, 2].map(|d| psf.center_offset[d] - b[d].0);
    (cells, dims, center)
}

fn windowed(psf: &Psf, b: &Bounds) -> Psf {
    let (cells, window_dims, center_offset) = extract(psf, b);
    let inside: f64 = cells.iter().map(|c| c.norm_sqr()).sum();
    Psf {
        window_dims,
        cells,
        center_offset,
        retained_energy_fraction: psf.retained_energy_fraction * inside / psf.energy(),
        source: psf.source,
    }
}

/// Smallest centered window (grown greedily one axis at a time, taking the
/// axis that adds the most energy) retaining at least `energy_fraction` of
/// the PSF energy.
pub fn truncate_psf(full: &Psf, energy_fraction: f64) -> Result<Psf> {
    if !(energy_fraction > 0.0 && energy_fraction <= 1.0) {
        return Err(SimError::InvalidEnergyFraction(energy_fraction));
    }
    let energy: Vec<f64> = full.cells.iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = energy.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(SimError::DegeneratePsf);
    }
    if energy_fraction == 1.0 {
        return Ok(full.clone());
    }
    let b = grow_window(&energy, full.window_dims, full.center_offset, energy_fraction * total);
    Ok(windowed(full, &b))
}

/// Truncate each axis where the response along the axis through the center
/// stays below `threshold_power` (|cell|^2, same units as the PSF).
pub fn truncate_psf_noise_floor(full: &Psf, threshold_power: f64) -> Result<Psf> {
    if full.energy() == 0.0 {
        return Err(SimError::DegeneratePsf);
    }
    let mut b: Bounds = [(0, 0); 3];
    for (axis, bound) in b.iter_mut().enumerate() {
        let c = full.center_offset[axis];
        let n = full.window_dims[axis];
        let power = |pos: usize| {
            let mut o = full.center_offset;
            o[axis] = pos;
            full.get(o).norm_sqr()
        };
        let mut half = 0;
        for pos in 0..n {
            if power(pos) >= threshold_power {
                half = half.max(pos.abs_diff(c));
            }
        }
        *bound = if c >= half && c + half < n {
            (c - half, c + half)
        } else {
            (0, n - 1)
        };
    }
    Ok(windowed(full, &b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Complex mean; needs phase-stable recordings.
    #[default]
    Coherent,
    /// Mean of magnitudes; for phase-incoherent recordings.
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Keep this fraction of the (noise-debiased) energy.
    Energy(f64),
    /// Keep cells above `factor` times the single-frame noise variance.
    NoiseFloor { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    pub truncation: Truncation,
    pub averaging: Averaging,
    pub exec: Exec,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            truncation: Truncation::Energy(0.99),
            averaging: Averaging::Coherent,
            exec: Exec::default(),
        }
    }
}

impl MeasureOptions {
    pub fn with_energy(energy_fraction: f64) -> Self {
        Self {
            truncation: Truncation::Energy(energy_fraction),
            ..Self::default()
        }
    }
}

/// Minimum peak-to-median magnitude ratio for a usable calibration frame.
pub const MIN_PEAK_TO_MEDIAN: f64 = 10.0;

fn check_frames(frames: &[RadarTensor], cfg: &RadarConfig) -> Result<()> {
    if frames.is_empty() {
        return Err(SimError::Calibration("no frames".into()));
    }
    for f in frames {
        f.ensure_kind(TensorKind::Filtered)?;
        f.ensure_dims(cfg.dims())?;
    }
    Ok(())
}

/// Cell-wise average of `frames`, accumulated in frame order.
pub fn average_frames(frames: &[RadarTensor], averaging: Averaging, exec: Exec) -> Result<RadarTensor> {
    let first = frames.first().ok_or_else(|| SimError::Calibration("no frames".into()))?;
    let dims = first.dims();
    for f in frames {
        f.ensure_dims(dims)?;
    }
    let mut avg = RadarTensor::zeros(dims, first.kind());
    let row_len = avg.row_len();
    let scale = (frames.len() as f64).recip();
    exec.for_each_chunk(avg.cells_mut(), row_len, |row, out| {
        let start = row * row_len;
        for f in frames {
            let src = &f.cells()[start..start + row_len];
            match averaging {
                Averaging::Coherent => out.iter_mut().zip(src).for_each(|(o, s)| *o += s),
                Averaging::Magnitude => out.iter_mut().zip(src).for_each(|(o, s)| o.re += s.norm()),
            }
        }
        out.iter_mut().for_each(|o| *o *= scale);
    });
    Ok(avg)
}

fn median(mut xs: Vec<f64>) -> f64 {
    let mid = xs.len() / 2;
    let (_, m, _) = xs.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

fn mean_frame_noise(frames: &[RadarTensor]) -> Result<f64> {
    let sum = frames
        .iter()
        .map(|f| estimate_noise_variance(f, &NoiseRegion::Auto))
        .sum::<Result<f64>>()?;
    Ok(sum / frames.len() as f64)
}

/// Estimate the PSF from frames of a single dominant stationary scatterer.
///
/// Frames are averaged, the global magnitude peak becomes the window center,
/// the window is truncated per `opts` and the result is scaled so the center
/// cell is exactly 1.
pub fn measure_psf(frames: &[RadarTensor], cfg: &RadarConfig, opts: &MeasureOptions) -> Result<Psf> {
    check_frames(frames, cfg)?;
    let avg = average_frames(frames, opts.averaging, opts.exec)?;
    let (peak_idx, peak_mag) = avg.peak();
    let med = median(avg.cells().iter().map(|c| c.norm()).collect());
    if peak_mag == 0.0 || peak_mag < MIN_PEAK_TO_MEDIAN * med {
        return Err(SimError::Calibration(format!(
            "no distinct peak (peak {peak_mag:.3e}, median {med:.3e})"
        )));
    }
    let full = Psf::centered_from_tensor(&avg, avg.position(peak_idx), PsfSource::Measured);

    let truncated = match opts.truncation {
        Truncation::Energy(fraction) => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(SimError::InvalidEnergyFraction(fraction));
            }
            // Subtract the residual noise pedestal, unclipped, so noise cells
            // contribute zero energy on average however many there are.
            let floor = match opts.averaging {
                Averaging::Coherent => estimate_noise_variance(&avg, &NoiseRegion::Auto)?,
                // E|mean of M Rayleigh magnitudes|^2 for per-frame variance s2
                Averaging::Magnitude => {
                    let m = frames.len() as f64;
                    let s2 = mean_frame_noise(frames)?;
                    s2 * (FRAC_PI_4 + (1.0 - FRAC_PI_4) / m)
                }
            };
            let energy: Vec<f64> = full.cells.iter().map(|c| c.norm_sqr() - floor).collect();
            let total: f64 = energy.iter().sum();
            if total.is_nan() || total <= 0.0 {
                return Err(SimError::Calibration("no energy above the noise floor".into()));
            }
            let b = if fraction == 1.0 {
                [0, 1, 2].map(|d| (0, full.window_dims[d] - 1))
            } else {
                grow_window(&energy, full.window_dims, full.center_offset, fraction * total)
            };
            let (cells, window_dims, center_offset) = extract(&full, &b);
            let mut inside = 0.0;
            for i in b[0].0..=b[0].1 {
                for j in b[1].0..=b[1].1 {
                    for k in b[2].0..=b[2].1 {
                        inside += energy[full.index([i, j, k])];
                    }
                }
            }
            Psf {
                window_dims,
                cells,
                center_offset,
                retained_energy_fraction: (inside / total).clamp(0.0, 1.0),
                source: PsfSource::Measured,
            }
        }
        Truncation::NoiseFloor { factor } => truncate_psf_noise_floor(&full, factor * mean_frame_noise(frames)?)?,
    };
    truncated.normalized_to_peak()
}

/// Cell region used for noise estimation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoiseRegion {
    /// The lowest-energy quarter of all cells, bias-corrected for the
    /// exponential distribution of |noise|^2.
    Auto,
    /// Explicit half-open index ranges per axis.
    Cells {
        range: std::ops::Range<usize>,
        doppler: std::ops::Range<usize>,
        azimuth: std::ops::Range<usize>,
    },
}

/// Mean of the lowest quarter of an Exp(1) sample:
/// `4 (1 - (1 + q) e^-q)` with `q = ln(4/3)`.
pub fn lower_quartile_mean_factor() -> f64 {
    let q = (4.0f64 / 3.0).ln();
    4.0 * (1.0 - (1.0 + q) * (-q).exp())
}

/// Per-cell complex noise variance of a filtered frame.
pub fn estimate_noise_variance(frame: &RadarTensor, region: &NoiseRegion) -> Result<f64> {
    frame.ensure_kind(TensorKind::Filtered)?;
    match region {
        NoiseRegion::Auto => {
            if frame.is_empty() {
                return Err(SimError::EmptyRegion);
            }
            let mut power: Vec<f64> = frame.cells().iter().map(|c| c.norm_sqr()).collect();
            let count = (power.len() / 4).max(1);
            if count < power.len() {
                power.select_nth_unstable_by(count, f64::total_cmp);
            }
            let mean = power[..count].iter().sum::<f64>() / count as f64;
            Ok(mean / lower_quartile_mean_factor())
        }
        NoiseRegion::Cells {
            range,
            doppler,
            azimuth,
        } => {
            let dims = frame.dims();
            if range.is_empty() || doppler.is_empty() || azimuth.is_empty() {
                return Err(SimError::EmptyRegion);
            }
            if range.end > dims[0] || doppler.end > dims[1] || azimuth.end > dims[2] {
                return Err(SimError::DimensionMismatch {
                    expected: dims,
                    actual: [range.end, doppler.end, azimuth.end],
                });
            }
            let mut sum = 0.0;
            for r in range.clone() {
                for d in doppler.clone() {
                    for a in azimuth.clone() {
                        sum += frame.get(r, d, a).norm_sqr();
                    }
                }
            }
            Ok(sum / (range.len() * doppler.len() * azimuth.len()) as f64)
        }
    }
}

/// Everything the fast pipeline needs from a real radar.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationBundle {
    pub psf: Psf,
    pub noise_variance: f64,
    pub frames_averaged: usize,
}

/// Measure the PSF from `frames` and the noise variance as the mean of the
/// per-frame automatic estimates.
pub fn calibrate(frames: &[RadarTensor], cfg: &RadarConfig, opts: &MeasureOptions) -> Result<CalibrationBundle> {
    let psf = measure_psf(frames, cfg, opts)?;
    let estimates = opts
        .exec
        .map_indices(frames.len(), |i| estimate_noise_variance(&frames[i], &NoiseRegion::Auto));
    let noise_variance = estimates.into_iter().sum::<Result<f64>>()? / frames.len() as f64;
    Ok(CalibrationBundle {
        psf,
        noise_variance,
        frames_averaged: frames.len(),
    })
}
