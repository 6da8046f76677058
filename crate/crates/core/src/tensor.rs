use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Whether a tensor holds received samples or match-filter output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TensorKind {
    RawSignal,
    Filtered,
}

impl TensorKind {
    pub fn to_byte(self) -> u8 {
        match self {
            TensorKind::RawSignal => 0,
            TensorKind::Filtered => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(TensorKind::RawSignal),
            1 => Some(TensorKind::Filtered),
            _ => None,
        }
    }
}

/// Dense complex (range, Doppler, azimuth) tensor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarTensor {
    dims: [usize; 3],
    cells: Vec<Complex64>,
    kind: TensorKind,
}

impl RadarTensor {
    pub fn zeros(dims: [usize; 3], kind: TensorKind) -> Self {
        Self {
            dims,
            cells: vec![Complex64::new(0.0, 0.0); dims[0] * dims[1] * dims[2]],
            kind,
        }
    }

    pub fn from_cells(dims: [usize; 3], kind: TensorKind, cells: Vec<Complex64>) -> Result<Self> {
        if cells.len() != dims[0] * dims[1] * dims[2] {
            return Err(SimError::Format(format!(
                "{} cells for dims {dims:?}",
                cells.len()
            )));
        }
        Ok(Self { dims, cells, kind })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn kind(&self) -> TensorKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Complex64] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [Complex64] {
        &mut self.cells
    }

    pub fn into_cells(self) -> Vec<Complex64> {
        self.cells
    }

    /// Number of cells in one range row (one Doppler x azimuth plane).
    pub fn row_len(&self) -> usize {
        self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn index(&self, r: usize, d: usize, a: usize) -> usize {
        (r * self.dims[1] + d) * self.dims[2] + a
    }

    pub fn position(&self, index: usize) -> [usize; 3] {
        let a = index % self.dims[2];
        let rd = index / self.dims[2];
        [rd / self.dims[1], rd % self.dims[1], a]
    }

    #[inline]
    pub fn get(&self, r: usize, d: usize, a: usize) -> Complex64 {
        self.cells[self.index(r, d, a)]
    }

    #[inline]
    pub fn get_mut(&mut self, r: usize, d: usize, a: usize) -> &mut Complex64 {
        let i = self.index(r, d, a);
        &mut self.cells[i]
    }

    pub fn ensure_kind(&self, expected: TensorKind) -> Result<()> {
        if self.kind != expected {
            return Err(SimError::WrongKind {
                expected,
                actual: self.kind,
            });
        }
        Ok(())
    }

    pub fn ensure_dims(&self, expected: [usize; 3]) -> Result<()> {
        if self.dims != expected {
            return Err(SimError::DimensionMismatch {
                expected,
                actual: self.dims,
            });
        }
        Ok(())
    }

    /// Sum of |cell|^2.
    pub fn energy(&self) -> f64 {
        self.cells.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// Index and magnitude of the largest-magnitude cell (first on ties).
    pub fn peak(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, c) in self.cells.iter().enumerate() {
            let m = c.norm();
            if m > best.1 {
                best = (i, m);
            }
        }
        (best.0, best.1.max(0.0))
    }

    /// ||self - other|| / ||other||, or the absolute distance when `other`
    /// is all zeros.
    pub fn relative_distance(&self, other: &RadarTensor) -> Result<f64> {
        other.ensure_dims(self.dims)?;
        let diff: f64 = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let reference = other.frobenius_norm();
        Ok(if reference > 0.0 { diff / reference } else { diff })
    }

    /// Largest per-cell deviation in magnitude, max | |a| - |b| |.
    pub fn max_magnitude_deviation(&self, other: &RadarTensor) -> Result<f64> {
        other.ensure_dims(self.dims)?;
        Ok(self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max))
    }

    /// Largest complex per-cell deviation, max |a - b|.
    pub fn max_abs_difference(&self, other: &RadarTensor) -> Result<f64> {
        other.ensure_dims(self.dims)?;
        Ok(self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn add_assign(&mut self, other: &RadarTensor) -> Result<()> {
        other.ensure_dims(self.dims)?;
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a += b;
        }
        Ok(())
    }

    pub fn scaled(&self, s: Complex64) -> RadarTensor {
        RadarTensor {
            dims: self.dims,
            cells: self.cells.iter().map(|c| c * s).collect(),
            kind: self.kind,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_position_round_trip() {
        let t = RadarTensor::zeros([4, 3, 5], TensorKind::Filtered);
        for i in 0..t.len() {
            let [r, d, a] = t.position(i);
            assert_eq!(t.index(r, d, a), i);
        }
    }

    #[test]
    fn kind_checks() {
        let t = RadarTensor::zeros([2, 2, 2], TensorKind::RawSignal);
        assert!(t.ensure_kind(TensorKind::RawSignal).is_ok());
        assert!(matches!(
            t.ensure_kind(TensorKind::Filtered),
            Err(SimError::WrongKind { .. })
        ));
        assert!(t.ensure_dims([2, 2, 3]).is_err());
    }

    #[test]
    fn relative_distance_against_zero() {
        let z = RadarTensor::zeros([2, 2, 2], TensorKind::Filtered);
        let mut t = z.clone();
        *t.get_mut(1, 1, 1) = Complex64::new(3.0, 4.0);
        assert_eq!(t.relative_distance(&z).unwrap(), 5.0);
        assert_eq!(z.relative_distance(&t).unwrap(), 1.0);
        assert_eq!(t.max_magnitude_deviation(&z).unwrap(), 5.0);
    }
}
