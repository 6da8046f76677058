//! Physical reflection points and their image on the tensor grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RadarConfig;
use crate::error::{Result, SimError};

/// One scatterer in the scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionPoint {
    pub range_m: f64,
    /// Positive = receding.
    pub radial_velocity_mps: f64,
    pub azimuth_rad: f64,
    pub amplitude: Complex64,
}

impl ReflectionPoint {
    pub fn new(range_m: f64, radial_velocity_mps: f64, azimuth_rad: f64, amplitude: Complex64) -> Self {
        Self {
            range_m,
            radial_velocity_mps,
            azimuth_rad,
            amplitude,
        }
    }
}

/// A reflection point expressed in fractional bin coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    /// Fractional (range, Doppler, azimuth) bin indices, each in `[0, n)`.
    pub k: [f64; 3],
    pub amplitude: Complex64,
}

impl GridPoint {
    /// Nearest integer cell, wrapped into the grid.
    pub fn nearest_cell(&self, dims: [usize; 3]) -> [usize; 3] {
        let mut cell = [0usize; 3];
        for d in 0..3 {
            cell[d] = (self.k[d].round() as usize) % dims[d];
        }
        cell
    }

    /// The same point moved onto its nearest integer cell.
    pub fn snapped(&self, dims: [usize; 3]) -> GridPoint {
        let c = self.nearest_cell(dims);
        GridPoint {
            k: [c[0] as f64, c[1] as f64, c[2] as f64],
            amplitude: self.amplitude,
        }
    }

    pub fn is_on_grid(&self) -> bool {
        self.k.iter().all(|k| k.fract() == 0.0)
    }
}

fn wrap(x: f64, n: usize) -> f64 {
    let n = n as f64;
    let r = x.rem_euclid(n);
    // rem_euclid can return n for tiny negative inputs
    if r >= n {
        0.0
    } else {
        r
    }
}

fn reject(field: &'static str, value: f64, reason: &'static str) -> SimError {
    SimError::InvalidPoint {
        field,
        value,
        reason,
    }
}

/// Map a physical reflection point onto fractional grid coordinates.
///
/// Range maps linearly; Doppler and azimuth are phase frequencies and wrap
/// modulo their grid size. Velocity is accepted for any finite value and
/// aliases like the sampled phase would.
pub fn map_point_to_grid(p: &ReflectionPoint, cfg: &RadarConfig) -> Result<GridPoint> {
    if !p.range_m.is_finite() {
        return Err(reject("range_m", p.range_m, "not finite"));
    }
    if p.range_m < 0.0 || p.range_m >= cfg.unambiguous_range() {
        return Err(reject("range_m", p.range_m, "outside [0, unambiguous range)"));
    }
    if !p.radial_velocity_mps.is_finite() {
        return Err(reject("radial_velocity_mps", p.radial_velocity_mps, "not finite"));
    }
    if !p.azimuth_rad.is_finite() {
        return Err(reject("azimuth_rad", p.azimuth_rad, "not finite"));
    }
    if p.azimuth_rad.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(reject("azimuth_rad", p.azimuth_rad, "outside (-pi/2, pi/2)"));
    }
    if !(p.amplitude.re.is_finite() && p.amplitude.im.is_finite()) {
        return Err(reject("amplitude", p.amplitude.norm(), "not finite"));
    }

    let k_range = p.range_m / cfg.range_resolution;
    let doppler_hz = 2.0 * p.radial_velocity_mps / cfg.carrier_wavelength;
    let k_doppler = wrap(
        doppler_hz * cfg.n_doppler as f64 * cfg.pulse_repetition_interval,
        cfg.n_doppler,
    );
    let k_azimuth = wrap(
        0.5 * cfg.n_azimuth as f64 * p.azimuth_rad.sin(),
        cfg.n_azimuth,
    );
    Ok(GridPoint {
        k: [wrap(k_range, cfg.n_range), k_doppler, k_azimuth],
        amplitude: p.amplitude,
    })
}

pub fn map_points(points: &[ReflectionPoint], cfg: &RadarConfig) -> Result<Vec<GridPoint>> {
    points.iter().map(|p| map_point_to_grid(p, cfg)).collect()
}

/// Physical point that lands exactly on integer `cell` (up to float rounding
/// in the azimuth arcsine). Doppler and azimuth bins above n/2 are taken as
/// negative frequencies.
pub fn cell_to_point(cell: [usize; 3], amplitude: Complex64, cfg: &RadarConfig) -> ReflectionPoint {
    let signed = |k: usize, n: usize| -> f64 {
        if k >= n.div_ceil(2) {
            k as f64 - n as f64
        } else {
            k as f64
        }
    };
    let range_m = cell[0] as f64 * cfg.range_resolution;
    let kd = signed(cell[1], cfg.n_doppler);
    let velocity = kd * cfg.carrier_wavelength
        / (2.0 * cfg.n_doppler as f64 * cfg.pulse_repetition_interval);
    let ka = signed(cell[2], cfg.n_azimuth);
    let azimuth = (2.0 * ka / cfg.n_azimuth as f64).clamp(-1.0, 1.0).asin();
    ReflectionPoint::new(range_m, velocity, azimuth, amplitude)
}
