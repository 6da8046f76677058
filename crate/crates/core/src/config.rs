//! Radar configuration, presets and the config file format.
//!
//! A [`RadarConfig`] fixes the tensor grid (range x Doppler x azimuth), the
//! physical size of one bin along each axis and the noise level of the
//! simulated receiver. Both simulation pipelines read the same config.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default reference range for amplitude normalisation, meters.
pub const DEFAULT_REFERENCE_RANGE_M: f64 = 25.0;

/// Taper applied along one axis before the match-filter transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    /// Window coefficients scaled to unit mean power, so white noise keeps its
    /// per-cell variance through the filter.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = match self {
            Window::Rectangular => vec![1.0; n],
            // periodic (DFT-even) form
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
                .collect(),
        };
        let mean_power = raw.iter().map(|w| w * w).sum::<f64>() / n as f64;
        let scale = mean_power.sqrt().recip();
        raw.into_iter().map(|w| w * scale).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    RaddetTi,
    DeskSmall,
}

impl std::str::FromStr for Preset {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raddet-ti" => Ok(Preset::RaddetTi),
            "desk-small" => Ok(Preset::DeskSmall),
            other => Err(SimError::UnknownPreset(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    pub n_range: usize,
    pub n_doppler: usize,
    pub n_azimuth: usize,
    /// Carrier wavelength, meters.
    pub carrier_wavelength: f64,
    /// Meters per range bin (c / 2B).
    pub range_resolution: f64,
    /// Pulse (chirp) repetition interval, seconds.
    pub pulse_repetition_interval: f64,
    /// Per-cell complex noise variance in tensor units.
    pub noise_variance: f64,
    pub rng_seed: u64,
    #[serde(default)]
    pub range_window: Window,
    #[serde(default)]
    pub doppler_window: Window,
    #[serde(default)]
    pub azimuth_window: Window,
    #[serde(default = "default_reference_range")]
    pub reference_range_m: f64,
}

fn default_reference_range() -> f64 {
    DEFAULT_REFERENCE_RANGE_M
}

/// Azimuth resolution quoted for the TI sensor behind the RADDet recordings.
pub const RADDET_AZIMUTH_RESOLUTION_DEG: f64 = 3.9;
/// Range resolution quoted for the same sensor, meters.
pub const RADDET_RANGE_RESOLUTION_M: f64 = 0.28;

/// Smallest half-wavelength ULA size whose Rayleigh beamwidth 2/n rad does
/// not exceed `resolution_deg`.
pub fn min_elements_for_resolution(resolution_deg: f64) -> usize {
    (2.0 / resolution_deg.to_radians()).ceil() as usize
}

impl RadarConfig {
    pub fn preset(preset: Preset) -> Self {
        let wavelength = SPEED_OF_LIGHT / 77.0e9;
        match preset {
            Preset::RaddetTi => RadarConfig {
                n_range: 256,
                n_doppler: 64,
                n_azimuth: min_elements_for_resolution(RADDET_AZIMUTH_RESOLUTION_DEG),
                carrier_wavelength: wavelength,
                range_resolution: RADDET_RANGE_RESOLUTION_M,
                pulse_repetition_interval: 60.0e-6,
                noise_variance: 1.0,
                rng_seed: 0,
                range_window: Window::Hann,
                doppler_window: Window::Hann,
                azimuth_window: Window::Rectangular,
                reference_range_m: DEFAULT_REFERENCE_RANGE_M,
            },
            Preset::DeskSmall => RadarConfig {
                n_range: 64,
                n_doppler: 32,
                n_azimuth: 32,
                carrier_wavelength: wavelength,
                range_resolution: 0.5,
                pulse_repetition_interval: 100.0e-6,
                noise_variance: 1.0,
                rng_seed: 0,
                range_window: Window::Rectangular,
                doppler_window: Window::Rectangular,
                azimuth_window: Window::Rectangular,
                reference_range_m: DEFAULT_REFERENCE_RANGE_M,
            },
        }
    }

    /// Look up a preset by its command-line name.
    pub fn from_preset_name(name: &str) -> Result<Self> {
        Ok(Self::preset(name.parse()?))
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.n_range, self.n_doppler, self.n_azimuth]
    }

    pub fn cell_count(&self) -> usize {
        self.n_range * self.n_doppler * self.n_azimuth
    }

    pub fn windows(&self) -> [Window; 3] {
        [self.range_window, self.doppler_window, self.azimuth_window]
    }

    pub fn unambiguous_range(&self) -> f64 {
        self.n_range as f64 * self.range_resolution
    }

    /// Radial velocity that advances the Doppler phase by one full cycle per
    /// pulse; velocities differing by this amount are indistinguishable.
    pub fn velocity_ambiguity(&self) -> f64 {
        self.carrier_wavelength / (2.0 * self.pulse_repetition_interval)
    }

    /// Largest unambiguous |radial velocity|.
    pub fn max_unambiguous_velocity(&self) -> f64 {
        0.5 * self.velocity_ambiguity()
    }

    /// Rayleigh beamwidth 2/n_azimuth, radians.
    pub fn azimuth_beamwidth(&self) -> f64 {
        2.0 / self.n_azimuth as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        for (name, n) in [
            ("n_range", self.n_range),
            ("n_doppler", self.n_doppler),
            ("n_azimuth", self.n_azimuth),
        ] {
            if n < 2 {
                return bad(format!("{name} must be >= 2, got {n}"));
            }
        }
        for (name, v) in [
            ("carrier_wavelength", self.carrier_wavelength),
            ("range_resolution", self.range_resolution),
            ("pulse_repetition_interval", self.pulse_repetition_interval),
            ("reference_range_m", self.reference_range_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return bad(format!(
                "noise_variance must be finite and >= 0, got {}",
                self.noise_variance
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RadarConfig =
            toml::from_str(s).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_small_dims() {
        let cfg = RadarConfig::from_preset_name("desk-small").unwrap();
        assert_eq!(cfg.dims(), [64, 32, 32]);
        cfg.validate().unwrap();
    }

    #[test]
    fn raddet_resolutions() {
        let cfg = RadarConfig::from_preset_name("raddet-ti").unwrap();
        assert_eq!(cfg.range_resolution, 0.28);
        // ceil(2 / 0.0680678) = ceil(29.38)
        assert_eq!(cfg.n_azimuth, 30);
        assert!(cfg.azimuth_beamwidth().to_degrees() <= 3.9);
        assert!(2.0f64 / 29.0 > 3.9f64.to_radians());
        assert!((cfg.unambiguous_range() - 71.68).abs() < 1e-9);
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            RadarConfig::from_preset_name("ti-awr9999"),
            Err(SimError::UnknownPreset(_))
        ));
    }

    #[test]
    fn rejects_degenerate_configs() {
        let mut cfg = RadarConfig::preset(Preset::DeskSmall);
        cfg.n_doppler = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = RadarConfig::preset(Preset::DeskSmall);
        cfg.noise_variance = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RadarConfig::preset(Preset::DeskSmall);
        cfg.range_resolution = f64::NAN;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip_uses_field_names() {
        let cfg = RadarConfig::preset(Preset::RaddetTi);
        let text = cfg.to_toml_string();
        for key in [
            "n_range",
            "n_doppler",
            "n_azimuth",
            "carrier_wavelength",
            "range_resolution",
            "pulse_repetition_interval",
            "noise_variance",
            "rng_seed",
        ] {
            assert!(text.contains(&format!("{key} = ")), "missing {key}");
        }
        assert_eq!(RadarConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn optional_fields_default() {
        let text = "n_range = 16\nn_doppler = 8\nn_azimuth = 8\ncarrier_wavelength = 0.004\n\
                    range_resolution = 0.5\npulse_repetition_interval = 1e-4\n\
                    noise_variance = 0.5\nrng_seed = 3\n";
        let cfg = RadarConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.range_window, Window::Rectangular);
        assert_eq!(cfg.reference_range_m, DEFAULT_REFERENCE_RANGE_M);
    }

    #[test]
    fn windows_have_unit_mean_power() {
        for w in [Window::Rectangular, Window::Hann] {
            for n in [2, 7, 64] {
                let c = w.coefficients(n);
                let p = c.iter().map(|x| x * x).sum::<f64>() / n as f64;
                assert!((p - 1.0).abs() < 1e-12);
            }
        }
    }
}
