//! File formats.
//!
//! * Tensor: `RSRTEN1`, u32 dims x3, kind byte, f32 (re, im) pairs.
//! * Calibration bundle: `RSRCAL1`, u32 window dims x3, u32 center offset x3,
//!   f64 noise variance, f64 retained energy fraction, f32 (re, im) pairs.
//! * Image: 16-bit grayscale PNG of a dB image plus a JSON sidecar holding
//!   the affine map back to dB.
//! * Annotations and scenes: pretty-printed JSON.
//!
//! All integers and floats are little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::imaging::RadarImage;
use crate::psf::{CalibrationBundle, Psf, PsfSource};
use crate::scene::{AnnotatedScene, ObjectClass};
use crate::tensor::{RadarTensor, TensorKind};

pub const TENSOR_MAGIC: &[u8; 7] = b"RSRTEN1";
pub const CALIBRATION_MAGIC: &[u8; 7] = b"RSRCAL1";

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => SimError::Format("truncated file".into()),
        _ => SimError::Io(e),
    })?;
    Ok(buf)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    Ok(u32::from_le_bytes(read_exact(r)?))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_exact(r)?))
}

fn read_dims(r: &mut impl Read) -> Result<[usize; 3]> {
    Ok([read_u32(r)? as usize, read_u32(r)? as usize, read_u32(r)? as usize])
}

fn write_dims(w: &mut impl Write, dims: [usize; 3]) -> Result<()> {
    for d in dims {
        let d = u32::try_from(d).map_err(|_| SimError::Format(format!("dimension {d} exceeds u32")))?;
        w.write_all(&d.to_le_bytes())?;
    }
    Ok(())
}

fn write_cells(w: &mut impl Write, cells: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(cells.len() * 8);
    for c in cells {
        buf.extend_from_slice(&(c.re as f32).to_le_bytes());
        buf.extend_from_slice(&(c.im as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_cells(r: &mut impl Read, count: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)
        .map_err(|_| SimError::Format(format!("expected {count} cells")))?;
    let mut rest = Vec::new();
    if r.read_to_end(&mut rest)? != 0 {
        return Err(SimError::Format("trailing bytes after cell data".into()));
    }
    Ok(buf
        .chunks_exact(8)
        .map(|b| {
            let re = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
            let im = f32::from_le_bytes([b[4], b[5], b[6], b[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect())
}

fn check_magic(r: &mut impl Read, magic: &[u8; 7]) -> Result<()> {
    let got: [u8; 7] = read_exact(r)?;
    if &got != magic {
        return Err(SimError::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

pub fn write_tensor(w: &mut impl Write, t: &RadarTensor) -> Result<()> {
    w.write_all(TENSOR_MAGIC)?;
    write_dims(w, t.dims())?;
    w.write_all(&[t.kind().to_byte()])?;
    write_cells(w, t.cells())
}

pub fn read_tensor(r: &mut impl Read) -> Result<RadarTensor> {
    check_magic(r, TENSOR_MAGIC)?;
    let dims = read_dims(r)?;
    let [kind] = read_exact::<1>(r)?;
    let kind = TensorKind::from_byte(kind).ok_or_else(|| SimError::Format(format!("unknown tensor kind {kind}")))?;
    let cells = read_cells(r, dims.iter().product())?;
    RadarTensor::from_cells(dims, kind, cells)
}

pub fn save_tensor(path: impl AsRef<Path>, t: &RadarTensor) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tensor(&mut w, t)?;
    w.flush()?;
    Ok(())
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<RadarTensor> {
    read_tensor(&mut BufReader::new(File::open(path)?))
}

pub fn write_calibration(w: &mut impl Write, b: &CalibrationBundle) -> Result<()> {
    w.write_all(CALIBRATION_MAGIC)?;
    write_dims(w, b.psf.window_dims)?;
    write_dims(w, b.psf.center_offset)?;
    w.write_all(&b.noise_variance.to_le_bytes())?;
    w.write_all(&b.psf.retained_energy_fraction.to_le_bytes())?;
    write_cells(w, &b.psf.cells)
}

/// Source and frame count are not part of the format; a loaded bundle is
/// `Measured` with `frames_averaged = 1`.
pub fn read_calibration(r: &mut impl Read) -> Result<CalibrationBundle> {
    check_magic(r, CALIBRATION_MAGIC)?;
    let window_dims = read_dims(r)?;
    let center_offset = read_dims(r)?;
    if (0..3).any(|d| center_offset[d] >= window_dims[d]) {
        return Err(SimError::Format(format!(
            "center offset {center_offset:?} outside window {window_dims:?}"
        )));
    }
    let noise_variance = read_f64(r)?;
    let retained_energy_fraction = read_f64(r)?;
    let cells = read_cells(r, window_dims.iter().product())?;
    Ok(CalibrationBundle {
        psf: Psf {
            window_dims,
            cells,
            center_offset,
            retained_energy_fraction,
            source: PsfSource::Measured,
        },
        noise_variance,
        frames_averaged: 1,
    })
}

pub fn save_calibration(path: impl AsRef<Path>, b: &CalibrationBundle) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_calibration(&mut w, b)?;
    w.flush()?;
    Ok(())
}

pub fn load_calibration(path: impl AsRef<Path>) -> Result<CalibrationBundle> {
    read_calibration(&mut BufReader::new(File::open(path)?))
}

/// Affine map between 16-bit pixel values and dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSidecar {
    pub floor_db: f64,
    pub peak_db: f64,
    /// `db = floor_db + pixel * (peak_db - floor_db) / 65535`
    pub db_per_step: f64,
    pub width: usize,
    pub height: usize,
    pub rows: String,
    pub columns: String,
}

impl ImageSidecar {
    pub fn pixel_to_db(&self, p: u16) -> f64 {
        self.floor_db + p as f64 * self.db_per_step
    }
}

pub fn sidecar_path(png: &Path) -> PathBuf {
    let mut s = png.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn encode_png(path: &Path, width: usize, height: usize, pixels: &[u16]) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    let mut enc = png::Encoder::new(w, width as u32, height as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Sixteen);
    let mut writer = enc.write_header().map_err(|e| SimError::Format(e.to_string()))?;
    let bytes: Vec<u8> = pixels.iter().flat_map(|p| p.to_be_bytes()).collect();
    writer
        .write_image_data(&bytes)
        .map_err(|e| SimError::Format(e.to_string()))?;
    writer.finish().map_err(|e| SimError::Format(e.to_string()))?;
    Ok(())
}

/// Write a dB-valued image: `floor_db..peak` maps affinely onto `0..65535`.
/// Rows are image rows top to bottom; `rows`/`columns` describe the axes.
pub fn save_db_png(
    path: impl AsRef<Path>,
    db: &[f64],
    width: usize,
    height: usize,
    floor_db: f64,
    rows: &str,
    columns: &str,
) -> Result<ImageSidecar> {
    let path = path.as_ref();
    assert_eq!(db.len(), width * height);
    let peak_db = db.iter().copied().fold(floor_db, f64::max);
    let span = peak_db - floor_db;
    let pixels: Vec<u16> = db
        .iter()
        .map(|&v| {
            if span <= 0.0 {
                0
            } else {
                (((v.max(floor_db) - floor_db) / span) * 65535.0).round() as u16
            }
        })
        .collect();
    encode_png(path, width, height, &pixels)?;
    let sidecar = ImageSidecar {
        floor_db,
        peak_db,
        db_per_step: span / 65535.0,
        width,
        height,
        rows: rows.to_string(),
        columns: columns.to_string(),
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar).expect("sidecar"))?;
    Ok(sidecar)
}

/// Save a polar image (rows = range bins, columns = boresight-centered
/// azimuth bins) already converted to dB.
pub fn save_polar_image(path: impl AsRef<Path>, img_db: &RadarImage, floor_db: f64) -> Result<ImageSidecar> {
    let centered = img_db.azimuth_centered();
    save_db_png(
        path,
        &centered.values,
        centered.n_azimuth,
        centered.n_range,
        floor_db,
        "range_bin",
        "azimuth_bin_centered",
    )
}

/// Decode a PNG written by [`save_db_png`] back to dB values (quantized).
pub fn load_db_png(path: impl AsRef<Path>) -> Result<(Vec<f64>, ImageSidecar)> {
    let path = path.as_ref();
    let sidecar: ImageSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)
        .map_err(|e| SimError::Format(e.to_string()))?;
    let decoder = png::Decoder::new(BufReader::new(File::open(path)?));
    let mut reader = decoder.read_info().map_err(|e| SimError::Format(e.to_string()))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| SimError::Format(e.to_string()))?;
    if info.bit_depth != png::BitDepth::Sixteen || info.color_type != png::ColorType::Grayscale {
        return Err(SimError::Format("expected 16-bit grayscale PNG".into()));
    }
    if info.width as usize != sidecar.width || info.height as usize != sidecar.height {
        return Err(SimError::Format("PNG size disagrees with sidecar".into()));
    }
    let values = buf[..info.buffer_size()]
        .chunks_exact(2)
        .map(|b| sidecar.pixel_to_db(u16::from_be_bytes([b[0], b[1]])))
        .collect();
    Ok((values, sidecar))
}

/// One annotated object in a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationEntry {
    pub class: ObjectClass,
    /// Inclusive (r0, r1, a0, a1) in range bins and centered azimuth bins.
    pub box_bins: [usize; 4],
    pub range_m: (f64, f64),
    pub azimuth_deg: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAnnotations {
    pub frame: usize,
    pub seed: u64,
    pub objects: Vec<AnnotationEntry>,
}

impl FrameAnnotations {
    pub fn from_scene(frame: usize, scene: &AnnotatedScene) -> Self {
        Self {
            frame,
            seed: scene.seed,
            objects: scene
                .objects
                .iter()
                .zip(&scene.boxes)
                .map(|(o, b)| AnnotationEntry {
                    class: o.class_label,
                    box_bins: [b.r0, b.r1, b.a0, b.a1],
                    range_m: b.range_m,
                    azimuth_deg: b.azimuth_deg,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("annotations serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| SimError::Format(e.to_string()))
    }
}
