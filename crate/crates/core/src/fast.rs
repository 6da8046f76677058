//! Sparse PSF-convolution pipeline.
//!
//! Each reflection point becomes one (or, with [`Placement::Splat`], up to
//! eight) weighted impulses on the integer grid; every impulse adds a
//! circularly shifted, scaled copy of the PSF window to the tensor. Cost is
//! `O(N_p * N_f)` additions plus the optional tensor-domain noise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RadarConfig;
use crate::conventional::simulate_conventional_grid;
use crate::error::{Result, SimError};
use crate::exec::Exec;
use crate::grid::{map_points, GridPoint, ReflectionPoint};
use crate::noise::{add_complex_noise, NoiseDomain};
use crate::psf::{analytic_psf, truncate_psf, Psf};
use crate::tensor::{RadarTensor, TensorKind};

/// How fractional grid positions become integer impulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Round each index to the nearest bin.
    #[default]
    Nearest,
    /// Trilinear weights over the 8 surrounding bins.
    Splat,
}

impl std::str::FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nearest" => Ok(Placement::Nearest),
            "splat" => Ok(Placement::Splat),
            other => Err(format!("unknown placement `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impulse {
    pub cell: [usize; 3],
    pub scale: Complex64,
}

pub fn impulses(grid: &[GridPoint], dims: [usize; 3], placement: Placement) -> Vec<Impulse> {
    let mut out = Vec::with_capacity(grid.len());
    for g in grid {
        match placement {
            Placement::Nearest => out.push(Impulse {
                cell: g.nearest_cell(dims),
                scale: g.amplitude,
            }),
            Placement::Splat => {
                let base = g.k.map(|k| k.floor());
                let frac = [0, 1, 2].map(|d| g.k[d] - base[d]);
                for corner in 0..8usize {
                    let mut weight = 1.0;
                    let mut cell = [0usize; 3];
                    for d in 0..3 {
                        let upper = (corner >> (2 - d)) & 1 == 1;
                        weight *= if upper { frac[d] } else { 1.0 - frac[d] };
                        cell[d] = (base[d] as usize + upper as usize) % dims[d];
                    }
                    if weight != 0.0 {
                        out.push(Impulse {
                            cell,
                            scale: g.amplitude * weight,
                        });
                    }
                }
            }
        }
    }
    out
}

/// `acc[(cell + o - center) mod dims] += scale * psf[o]` for every window
/// offset `o`.
pub fn superpose_shifted_psf(acc: &mut RadarTensor, cell: [usize; 3], scale: Complex64, psf: &Psf) {
    let dims = acc.dims();
    let w = psf.window_dims;
    let c = psf.center_offset;
    for o0 in 0..w[0] {
        let r = (cell[0] + dims[0] + o0 - c[0]) % dims[0];
        for o1 in 0..w[1] {
            let d = (cell[1] + dims[1] + o1 - c[1]) % dims[1];
            let src = &psf.cells[psf.index([o0, o1, 0])..][..w[2]];
            for (o2, v) in src.iter().enumerate() {
                let a = (cell[2] + dims[2] + o2 - c[2]) % dims[2];
                *acc.get_mut(r, d, a) += scale * v;
            }
        }
    }
}

fn accumulate(acc: &mut RadarTensor, imps: &[Impulse], psf: &Psf, exec: Exec) {
    if !exec.is_parallel() {
        for imp in imps {
            superpose_shifted_psf(acc, imp.cell, imp.scale, psf);
        }
        return;
    }
    // Each worker owns whole range rows and visits impulses in input order,
    // so every cell sees the same addition sequence as the loop above.
    let [nr, nd, na] = acc.dims();
    let w = psf.window_dims;
    let c = psf.center_offset;
    let row_len = acc.row_len();
    exec.for_each_chunk(acc.cells_mut(), row_len, |r, row| {
        for imp in imps {
            let o0 = (r + nr + c[0] - imp.cell[0]) % nr;
            if o0 >= w[0] {
                continue;
            }
            for o1 in 0..w[1] {
                let d = (imp.cell[1] + nd + o1 - c[1]) % nd;
                let src = &psf.cells[psf.index([o0, o1, 0])..][..w[2]];
                let plane = &mut row[d * na..(d + 1) * na];
                for (o2, v) in src.iter().enumerate() {
                    let a = (imp.cell[2] + na + o2 - c[2]) % na;
                    plane[a] += imp.scale * v;
                }
            }
        }
    });
}

fn check_psf(psf: &Psf, dims: [usize; 3]) -> Result<()> {
    if (0..3).any(|d| psf.window_dims[d] > dims[d] || psf.center_offset[d] >= psf.window_dims[d]) {
        return Err(SimError::PsfTooLarge {
            window: psf.window_dims,
            grid: dims,
        });
    }
    Ok(())
}

/// Noiseless fast simulation of pre-mapped grid points.
pub fn simulate_fast_grid(grid: &[GridPoint], psf: &Psf, dims: [usize; 3], placement: Placement, exec: Exec) -> Result<RadarTensor> {
    check_psf(psf, dims)?;
    let imps = impulses(grid, dims, placement);
    let mut acc = RadarTensor::zeros(dims, TensorKind::Filtered);
    accumulate(&mut acc, &imps, psf, exec);
    Ok(acc)
}

pub fn simulate_fast(
    points: &[ReflectionPoint],
    psf: &Psf,
    cfg: &RadarConfig,
    add_noise: bool,
    placement: Placement,
) -> Result<RadarTensor> {
    simulate_fast_with(points, psf, cfg, add_noise, placement, Exec::default())
}

pub fn simulate_fast_with(
    points: &[ReflectionPoint],
    psf: &Psf,
    cfg: &RadarConfig,
    add_noise: bool,
    placement: Placement,
    exec: Exec,
) -> Result<RadarTensor> {
    cfg.validate()?;
    check_psf(psf, cfg.dims())?;
    let grid = map_points(points, cfg)?;
    let mut t = simulate_fast_grid(&grid, psf, cfg.dims(), placement, exec)?;
    if add_noise {
        add_complex_noise(&mut t, cfg.noise_variance, cfg.rng_seed, NoiseDomain::Tensor, exec);
    }
    Ok(t)
}

/// Rescale a peak-normalized (e.g. measured) PSF so a unit point through the
/// fast pipeline matches the conventional pipeline at the point's own cell.
pub fn match_gain(psf: &Psf, cfg: &RadarConfig) -> Result<Psf> {
    let unit = GridPoint {
        k: [0.0; 3],
        amplitude: Complex64::new(1.0, 0.0),
    };
    let reference = simulate_conventional_grid(&[unit], cfg, Exec::default())?.get(0, 0, 0);
    let center = psf.center_value();
    if center.norm() == 0.0 {
        return Err(SimError::DegeneratePsf);
    }
    Ok(psf.rescaled(reference / center))
}

/// Fast-vs-conventional comparison on identical, grid-snapped inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub n_points: usize,
    /// Relative Frobenius distance, full PSF.
    pub full_error: f64,
    /// Relative Frobenius distance, truncated PSF.
    pub truncated_error: f64,
    /// Largest per-cell magnitude deviation with the truncated PSF.
    pub truncated_max_deviation: f64,
    /// Per-cell noise standard deviation of `cfg`.
    pub noise_sigma: f64,
    pub energy_fraction: f64,
    pub truncated_window: [usize; 3],
    pub retained_energy_fraction: f64,
}

impl EquivalenceReport {
    /// Truncated output deviates from the reference by less than one noise
    /// standard deviation everywhere.
    pub fn below_noise(&self) -> bool {
        self.truncated_max_deviation < self.noise_sigma
    }
}

pub fn equivalence_report(points: &[ReflectionPoint], cfg: &RadarConfig, energy_fraction: f64) -> Result<EquivalenceReport> {
    equivalence_report_with(points, cfg, energy_fraction, Exec::default())
}

pub fn equivalence_report_with(
    points: &[ReflectionPoint],
    cfg: &RadarConfig,
    energy_fraction: f64,
    exec: Exec,
) -> Result<EquivalenceReport> {
    let dims = cfg.dims();
    let grid: Vec<GridPoint> = map_points(points, cfg)?.iter().map(|g| g.snapped(dims)).collect();
    let reference = simulate_conventional_grid(&grid, cfg, exec)?;
    let full = analytic_psf(cfg)?;
    let truncated = truncate_psf(&full, energy_fraction)?;
    let fast_full = simulate_fast_grid(&grid, &full, dims, Placement::Nearest, exec)?;
    let fast_truncated = simulate_fast_grid(&grid, &truncated, dims, Placement::Nearest, exec)?;
    Ok(EquivalenceReport {
        n_points: points.len(),
        full_error: fast_full.relative_distance(&reference)?,
        truncated_error: fast_truncated.relative_distance(&reference)?,
        truncated_max_deviation: fast_truncated.max_magnitude_deviation(&reference)?,
        noise_sigma: cfg.noise_variance.sqrt(),
        energy_fraction,
        truncated_window: truncated.window_dims,
        retained_energy_fraction: truncated.retained_energy_fraction,
    })
}

/// Comparison of two already-simulated tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorComparison {
    pub dims: [usize; 3],
    pub relative_error: f64,
    pub max_abs_difference: f64,
    pub max_magnitude_deviation: f64,
}

pub fn compare_tensors(candidate: &RadarTensor, reference: &RadarTensor) -> Result<TensorComparison> {
    Ok(TensorComparison {
        dims: reference.dims(),
        relative_error: candidate.relative_distance(reference)?,
        max_abs_difference: candidate.max_abs_difference(reference)?,
        max_magnitude_deviation: candidate.max_magnitude_deviation(reference)?,
    })
}
