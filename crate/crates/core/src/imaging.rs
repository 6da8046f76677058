//! Range-azimuth images from radar tensors.

use serde::{Deserialize, Serialize};

use crate::config::RadarConfig;
use crate::error::{Result, SimError};
use crate::tensor::{RadarTensor, TensorKind};

/// Real-valued image, row-major over (range bin, azimuth bin).
#[derive(Debug, Clone, PartialEq)]
pub struct RadarImage {
    pub n_range: usize,
    pub n_azimuth: usize,
    pub values: Vec<f64>,
}

impl RadarImage {
    pub fn zeros(n_range: usize, n_azimuth: usize) -> Self {
        Self {
            n_range,
            n_azimuth,
            values: vec![0.0; n_range * n_azimuth],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, a: usize) -> f64 {
        self.values[r * self.n_azimuth + a]
    }

    #[inline]
    pub fn set(&mut self, r: usize, a: usize, v: f64) {
        self.values[r * self.n_azimuth + a] = v;
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Columns rolled by `n_azimuth / 2` so boresight sits mid-image and
    /// azimuth increases left to right.
    pub fn azimuth_centered(&self) -> RadarImage {
        let mut out = RadarImage::zeros(self.n_range, self.n_azimuth);
        let shift = self.n_azimuth / 2;
        for r in 0..self.n_range {
            for a in 0..self.n_azimuth {
                out.set(r, (a + shift) % self.n_azimuth, self.get(r, a));
            }
        }
        out
    }
}

/// Collapse Doppler by taking the largest magnitude per (range, azimuth)
/// cell. Ties keep the lowest Doppler index.
pub fn tensor_to_image(t: &RadarTensor) -> Result<RadarImage> {
    t.ensure_kind(TensorKind::Filtered)?;
    let [nr, nd, na] = t.dims();
    let mut img = RadarImage::zeros(nr, na);
    for r in 0..nr {
        for a in 0..na {
            let mut best = t.get(r, 0, a).norm();
            for d in 1..nd {
                let m = t.get(r, d, a).norm();
                if m > best {
                    best = m;
                }
            }
            img.set(r, a, best);
        }
    }
    Ok(img)
}

/// Linear magnitude to dB, `20 log10(max(v, eps))`, never below `floor_db`.
pub fn to_decibels(img: &RadarImage, floor_db: f64) -> RadarImage {
    let eps = 10f64.powf(floor_db / 20.0);
    RadarImage {
        n_range: img.n_range,
        n_azimuth: img.n_azimuth,
        values: img
            .values
            .iter()
            .map(|&v| (20.0 * v.max(eps).log10()).max(floor_db))
            .collect(),
    }
}

/// Top-down x-y raster. Row 0 is the far edge, column 0 is the left edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartesianRaster {
    pub width: usize,
    pub height: usize,
    pub pixel_m: f64,
    pub values: Vec<f64>,
    /// False for pixels outside the field of view.
    pub inside: Vec<bool>,
}

impl CartesianRaster {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = row * self.width + col;
        self.inside[i].then_some(self.values[i])
    }

    /// Center of a pixel in meters, (x, y).
    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let half_width = 0.5 * self.width as f64 * self.pixel_m;
        let x = -half_width + (col as f64 + 0.5) * self.pixel_m;
        let y = (self.height - row) as f64 * self.pixel_m - 0.5 * self.pixel_m;
        (x, y)
    }
}

/// Nearest-neighbour resampling of a native-order polar image onto a
/// Cartesian grid with `pixel_m` square pixels.
pub fn polar_to_cartesian(img: &RadarImage, cfg: &RadarConfig, pixel_m: f64) -> Result<CartesianRaster> {
    if !(pixel_m.is_finite() && pixel_m > 0.0) {
        return Err(SimError::InvalidConfig(format!("pixel size {pixel_m} must be > 0")));
    }
    if img.n_range != cfg.n_range || img.n_azimuth != cfg.n_azimuth {
        return Err(SimError::DimensionMismatch {
            expected: [cfg.n_range, 1, cfg.n_azimuth],
            actual: [img.n_range, 1, img.n_azimuth],
        });
    }
    let max_range = cfg.unambiguous_range();
    let height = (max_range / pixel_m).round().max(1.0) as usize;
    let width = 2 * height;
    let mut raster = CartesianRaster {
        width,
        height,
        pixel_m,
        values: vec![0.0; width * height],
        inside: vec![false; width * height],
    };
    let na = cfg.n_azimuth as f64;
    for row in 0..height {
        for col in 0..width {
            let (x, y) = raster.pixel_center(row, col);
            let range = x.hypot(y);
            let range_bin = (range / cfg.range_resolution).round() as usize;
            if y <= 0.0 || range_bin >= cfg.n_range {
                continue;
            }
            let sin_az = x / range;
            let az_bin = ((0.5 * na * sin_az).round() as i64).rem_euclid(cfg.n_azimuth as i64) as usize;
            let i = row * width + col;
            raster.values[i] = img.get(range_bin, az_bin);
            raster.inside[i] = true;
        }
    }
    Ok(raster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn zero_tensor_zero_image() {
        let t = RadarTensor::zeros([8, 4, 6], TensorKind::Filtered);
        let img = tensor_to_image(&t).unwrap();
        assert_eq!((img.n_range, img.n_azimuth), (8, 6));
        assert!(img.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn raw_tensor_rejected() {
        let t = RadarTensor::zeros([2, 2, 2], TensorKind::RawSignal);
        assert!(tensor_to_image(&t).is_err());
    }

    #[test]
    fn max_over_doppler() {
        let mut t = RadarTensor::zeros([4, 4, 4], TensorKind::Filtered);
        *t.get_mut(1, 0, 2) = Complex64::new(1.0, 0.0);
        *t.get_mut(1, 3, 2) = Complex64::new(0.0, -2.0);
        assert_eq!(tensor_to_image(&t).unwrap().get(1, 2), 2.0);
    }

    #[test]
    fn decibels() {
        let img = RadarImage {
            n_range: 1,
            n_azimuth: 3,
            values: vec![1.0, 0.0, 10.0],
        };
        let db = to_decibels(&img, -120.0);
        assert_eq!(db.values[0], 0.0);
        assert_eq!(db.values[1], -120.0);
        assert!((db.values[2] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn centered_roll() {
        let mut img = RadarImage::zeros(1, 4);
        img.set(0, 0, 5.0);
        img.set(0, 3, 7.0);
        let c = img.azimuth_centered();
        assert_eq!(c.values, vec![0.0, 7.0, 5.0, 0.0]);
    }

    #[test]
    fn uniform_polar_image_is_uniform_inside_wedge() {
        let cfg = RadarConfig::preset(Preset::DeskSmall);
        let img = RadarImage {
            n_range: cfg.n_range,
            n_azimuth: cfg.n_azimuth,
            values: vec![3.5; cfg.cell_count() / cfg.n_doppler],
        };
        let ras = polar_to_cartesian(&img, &cfg, 0.25).unwrap();
        let inside: Vec<f64> = (0..ras.height)
            .flat_map(|r| (0..ras.width).map(move |c| (r, c)))
            .filter_map(|(r, c)| ras.get(r, c))
            .collect();
        assert!(!inside.is_empty());
        assert!(inside.iter().all(|&v| v == 3.5));
        // the two bottom corners are behind the radar's range limit
        assert!(ras.get(0, 0).is_none());
    }

    #[test]
    fn single_cell_lands_at_expected_xy() {
        let cfg = RadarConfig::preset(Preset::DeskSmall);
        let mut img = RadarImage::zeros(cfg.n_range, cfg.n_azimuth);
        let (rb, ab) = (40usize, 5usize);
        img.set(rb, ab, 1.0);
        let ras = polar_to_cartesian(&img, &cfg, 0.1).unwrap();
        let range = rb as f64 * cfg.range_resolution;
        let theta = (2.0 * ab as f64 / cfg.n_azimuth as f64).asin();
        let (ex, ey) = (range * theta.sin(), range * theta.cos());
        let mut lit = Vec::new();
        for r in 0..ras.height {
            for c in 0..ras.width {
                if ras.get(r, c) == Some(1.0) {
                    lit.push(ras.pixel_center(r, c));
                }
            }
        }
        assert!(!lit.is_empty());
        // the arc segment passes through the expected point
        let nearest = lit
            .iter()
            .map(|(x, y)| ((x - ex).powi(2) + (y - ey).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 0.15, "{nearest}");
        for (x, y) in &lit {
            assert!(((x * x + y * y).sqrt() - range).abs() <= 0.5 * cfg.range_resolution + 0.1);
        }
    }

    #[test]
    fn range_resolution_pixels_match_range_bins() {
        let cfg = RadarConfig::preset(Preset::DeskSmall);
        let img = RadarImage::zeros(cfg.n_range, cfg.n_azimuth);
        let ras = polar_to_cartesian(&img, &cfg, cfg.range_resolution).unwrap();
        assert_eq!(ras.height, cfg.n_range);
    }

    proptest! {
        #[test]
        fn image_is_monotone(cells in proptest::collection::vec(0.0f64..5.0, 48), idx in 0usize..48, bump in 0.0f64..3.0) {
            let mk = |v: &[f64]| RadarTensor::from_cells([4, 3, 4], TensorKind::Filtered,
                v.iter().map(|&x| Complex64::new(x, 0.0)).collect()).unwrap();
            let before = tensor_to_image(&mk(&cells)).unwrap();
            let mut bumped = cells.clone();
            bumped[idx] += bump;
            let after = tensor_to_image(&mk(&bumped)).unwrap();
            for (a, b) in after.values.iter().zip(&before.values) {
                prop_assert!(a >= b);
            }
        }

        #[test]
        fn decibels_preserve_order(a in 0.0f64..1e3, b in 0.0f64..1e3) {
            let img = RadarImage { n_range: 1, n_azimuth: 2, values: vec![a, b] };
            let db = to_decibels(&img, -100.0);
            if a <= b {
                prop_assert!(db.values[0] <= db.values[1]);
            }
            let floor = 10f64.powf(-5.0);
            if a > floor && b > floor && a < b {
                prop_assert!(db.values[0] < db.values[1]);
            }
        }
    }
}
