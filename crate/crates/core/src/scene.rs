//! Parametric automotive scenes: cars, poles and ground clutter as sets of
//! reflection points, with 2D range-azimuth box annotations.
//!
//! Coordinates: x is cross-range (positive to the right), y is boresight.
//! Object footprints are axis-aligned rectangles in (x, y).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::config::RadarConfig;
use crate::error::{Result, SimError};
use crate::grid::{map_point_to_grid, ReflectionPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectClass {
    Car,
    Pole,
    Clutter,
}

impl ObjectClass {
    /// Nominal radar cross section, dBsm.
    pub fn rcs_prior_dbsm(self) -> f64 {
        match self {
            ObjectClass::Car => 10.0,
            ObjectClass::Pole => 0.0,
            ObjectClass::Clutter => -10.0,
        }
    }

    fn rcs_jitter_db(self) -> f64 {
        match self {
            ObjectClass::Car => 2.0,
            ObjectClass::Pole => 1.0,
            ObjectClass::Clutter => 3.0,
        }
    }
}

/// Scene generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub n_cars: usize,
    pub n_poles: usize,
    /// Expected clutter objects per 100 m^2 of the observed sector.
    pub clutter_density: f64,
    /// (min, max) object range, meters.
    pub range_span: (f64, f64),
    /// (min, max) radial velocity for moving objects, m/s.
    pub velocity_span: (f64, f64),
    /// Objects are placed within +-this azimuth, degrees.
    pub azimuth_span_deg: f64,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            n_cars: 3,
            n_poles: 2,
            clutter_density: 0.5,
            range_span: (4.0, 28.0),
            velocity_span: (-8.0, 8.0),
            azimuth_span_deg: 60.0,
            seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn empty(seed: u64) -> Self {
        Self {
            n_cars: 0,
            n_poles: 0,
            clutter_density: 0.0,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub class_label: ObjectClass,
    /// (range_m, azimuth_rad) of the footprint center.
    pub center: (f64, f64),
    /// (depth_m along y, cross_m along x).
    pub extent: (f64, f64),
    pub radial_velocity_mps: f64,
    pub rcs_dbsm: f64,
    pub points: Vec<ReflectionPoint>,
}

impl SceneObject {
    /// Single-scatterer pole.
    pub fn pole(range_m: f64, azimuth_rad: f64, rcs_dbsm: f64) -> Self {
        Self {
            class_label: ObjectClass::Pole,
            center: (range_m, azimuth_rad),
            extent: (POLE_EXTENT, POLE_EXTENT),
            radial_velocity_mps: 0.0,
            rcs_dbsm,
            points: vec![ReflectionPoint::new(range_m, 0.0, azimuth_rad, Complex64::new(1.0, 0.0))],
        }
    }

    pub fn footprint(&self) -> Footprint {
        Footprint::around(polar_to_xy(self.center.0, self.center.1), self.extent)
    }

    /// Sum of |amplitude|^2 over the scatterers.
    pub fn received_power(&self) -> f64 {
        self.points.iter().map(|p| p.amplitude.norm_sqr()).sum()
    }
}

/// Inclusive box in (range bin, centered azimuth bin) coordinates plus its
/// physical extent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub r0: usize,
    pub r1: usize,
    pub a0: usize,
    pub a1: usize,
    pub range_m: (f64, f64),
    pub azimuth_deg: (f64, f64),
}

impl BoundingBox {
    pub fn contains(&self, range_bin: usize, centered_azimuth_bin: usize) -> bool {
        (self.r0..=self.r1).contains(&range_bin) && (self.a0..=self.a1).contains(&centered_azimuth_bin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedScene {
    pub objects: Vec<SceneObject>,
    pub boxes: Vec<BoundingBox>,
    pub seed: u64,
}

impl AnnotatedScene {
    pub fn points(&self) -> Vec<ReflectionPoint> {
        self.objects.iter().flat_map(|o| o.points.iter().copied()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| SimError::Format(e.to_string()))
    }
}

/// Column of an azimuth bin once boresight is moved to the middle of the
/// axis (`n_azimuth / 2`).
pub fn centered_azimuth_bin(native: usize, n_azimuth: usize) -> usize {
    (native + n_azimuth / 2) % n_azimuth
}

/// Azimuth (radians) at the center of a boresight-centered column.
pub fn centered_bin_azimuth(bin: f64, n_azimuth: usize) -> f64 {
    let s = 2.0 * (bin - (n_azimuth / 2) as f64) / n_azimuth as f64;
    s.clamp(-1.0, 1.0).asin()
}

/// Nearest (range bin, centered azimuth bin) of a point.
pub fn point_cell(p: &ReflectionPoint, cfg: &RadarConfig) -> Result<(usize, usize)> {
    let cell = map_point_to_grid(p, cfg)?.nearest_cell(cfg.dims());
    Ok((cell[0], centered_azimuth_bin(cell[2], cfg.n_azimuth)))
}

/// Tight box around an object's occupied cells with a one-bin margin.
pub fn bounding_box(object: &SceneObject, cfg: &RadarConfig) -> Result<BoundingBox> {
    let cells = object
        .points
        .iter()
        .map(|p| point_cell(p, cfg))
        .collect::<Result<Vec<_>>>()?;
    if cells.is_empty() {
        return Err(SimError::InfeasibleScene("object without scatterers".into()));
    }
    let rmin = cells.iter().map(|c| c.0).min().unwrap();
    let rmax = cells.iter().map(|c| c.0).max().unwrap();
    let amin = cells.iter().map(|c| c.1).min().unwrap();
    let amax = cells.iter().map(|c| c.1).max().unwrap();
    let r0 = rmin.saturating_sub(1);
    let r1 = (rmax + 1).min(cfg.n_range - 1);
    let a0 = amin.saturating_sub(1);
    let a1 = (amax + 1).min(cfg.n_azimuth - 1);
    Ok(BoundingBox {
        r0,
        r1,
        a0,
        a1,
        range_m: (r0 as f64 * cfg.range_resolution, r1 as f64 * cfg.range_resolution),
        azimuth_deg: (
            centered_bin_azimuth(a0 as f64, cfg.n_azimuth).to_degrees(),
            centered_bin_azimuth(a1 as f64, cfg.n_azimuth).to_degrees(),
        ),
    })
}

const POLE_EXTENT: f64 = 0.2;
const CLUTTER_EXTENT: f64 = 0.6;
const CAR_DEPTH: f64 = 4.5;
const CAR_WIDTH: f64 = 1.9;
const FOOTPRINT_GAP: f64 = 0.5;
const MAX_PLACEMENT_TRIES: usize = 200;

fn polar_to_xy(range: f64, azimuth: f64) -> (f64, f64) {
    (range * azimuth.sin(), range * azimuth.cos())
}

fn xy_to_polar(x: f64, y: f64) -> (f64, f64) {
    ((x * x + y * y).sqrt(), x.atan2(y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Footprint {
    fn around((cx, cy): (f64, f64), (depth, cross): (f64, f64)) -> Self {
        Self {
            x: (cx - 0.5 * cross, cx + 0.5 * cross),
            y: (cy - 0.5 * depth, cy + 0.5 * depth),
        }
    }

    pub fn overlaps(&self, other: &Footprint, gap: f64) -> bool {
        self.x.0 < other.x.1 + gap
            && other.x.0 < self.x.1 + gap
            && self.y.0 < other.y.1 + gap
            && other.y.0 < self.y.1 + gap
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let eps = 1e-9;
        x >= self.x.0 - eps && x <= self.x.1 + eps && y >= self.y.0 - eps && y <= self.y.1 + eps
    }

    fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x.0, self.y.0),
            (self.x.0, self.y.1),
            (self.x.1, self.y.0),
            (self.x.1, self.y.1),
        ]
    }
}

fn validate_spec(spec: &SceneSpec, cfg: &RadarConfig) -> Result<()> {
    cfg.validate()?;
    let bad = |m: String| Err(SimError::InfeasibleScene(m));
    let (rmin, rmax) = spec.range_span;
    let range_limit = cfg.unambiguous_range() - cfg.range_resolution;
    if !(rmin.is_finite() && rmax.is_finite() && rmin > 0.0 && rmin < rmax && rmax <= range_limit) {
        return bad(format!(
            "range span {:?} must satisfy 0 < min < max <= {range_limit:.3} m",
            spec.range_span
        ));
    }
    let (vmin, vmax) = spec.velocity_span;
    let vlim = cfg.max_unambiguous_velocity();
    if !(vmin.is_finite() && vmax.is_finite() && vmin <= vmax && vmin > -vlim && vmax < vlim) {
        return bad(format!(
            "velocity span {:?} must lie inside (-{vlim:.3}, {vlim:.3}) m/s",
            spec.velocity_span
        ));
    }
    if !(spec.azimuth_span_deg > 0.0 && spec.azimuth_span_deg < 90.0) {
        return bad(format!("azimuth span {} deg must lie in (0, 90)", spec.azimuth_span_deg));
    }
    if !(spec.clutter_density.is_finite() && spec.clutter_density >= 0.0) {
        return bad(format!("clutter density {} must be >= 0", spec.clutter_density));
    }
    Ok(())
}

struct Placer<'a> {
    spec: &'a SceneSpec,
    taken: Vec<Footprint>,
}

impl Placer<'_> {
    /// Random footprint center whose whole rectangle stays inside the range
    /// and azimuth spans and clear of every earlier footprint.
    fn place(&mut self, rng: &mut ChaCha8Rng, extent: (f64, f64), what: &str) -> Result<(f64, f64)> {
        let (rmin, rmax) = self.spec.range_span;
        let az = self.spec.azimuth_span_deg.to_radians();
        for _ in 0..MAX_PLACEMENT_TRIES {
            let r = rng.random_range(rmin..rmax);
            let theta = rng.random_range(-az..az);
            let fp = Footprint::around(polar_to_xy(r, theta), extent);
            let inside = fp.corners().iter().all(|&(x, y)| {
                let (cr, ca) = xy_to_polar(x, y);
                y > 0.0 && cr >= rmin && cr <= rmax && ca.abs() <= az
            });
            if inside && !self.taken.iter().any(|t| t.overlaps(&fp, FOOTPRINT_GAP)) {
                self.taken.push(fp);
                return Ok((r, theta));
            }
        }
        Err(SimError::InfeasibleScene(format!(
            "could not place {what} without overlap after {MAX_PLACEMENT_TRIES} tries"
        )))
    }
}

fn unit() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn jittered_rcs(class: ObjectClass, rng: &mut ChaCha8Rng) -> f64 {
    let j = class.rcs_jitter_db();
    class.rcs_prior_dbsm() + rng.random_range(-j..=j)
}

fn car(rng: &mut ChaCha8Rng, placer: &mut Placer, spec: &SceneSpec) -> Result<SceneObject> {
    let extent = (
        CAR_DEPTH * rng.random_range(0.9..1.1),
        CAR_WIDTH * rng.random_range(0.9..1.1),
    );
    let (r, theta) = placer.place(rng, extent, "car")?;
    let (vmin, vmax) = spec.velocity_span;
    let velocity = if vmin == vmax { vmin } else { rng.random_range(vmin..vmax) };
    let fp = Footprint::around(polar_to_xy(r, theta), extent);

    // rear edge faces the radar; of the two long sides, the one nearer the
    // boresight axis is visible
    let n_rear = rng.random_range(4..=6usize);
    let n_side = rng.random_range(2..=4usize);
    let mut points = Vec::with_capacity(n_rear + n_side);
    for i in 0..n_rear {
        let t = (i as f64 + rng.random_range(0.25..0.75)) / n_rear as f64;
        let x = fp.x.0 + t * (fp.x.1 - fp.x.0);
        let (pr, pa) = xy_to_polar(x, fp.y.0);
        points.push(ReflectionPoint::new(pr, velocity, pa, unit()));
    }
    let side_x = if fp.x.0 + fp.x.1 > 0.0 { fp.x.0 } else { fp.x.1 };
    for i in 0..n_side {
        let t = (i as f64 + 1.0) / n_side as f64;
        let y = fp.y.0 + t * (fp.y.1 - fp.y.0);
        let (pr, pa) = xy_to_polar(side_x, y);
        points.push(ReflectionPoint::new(pr, velocity, pa, unit()));
    }
    Ok(SceneObject {
        class_label: ObjectClass::Car,
        center: (r, theta),
        extent,
        radial_velocity_mps: velocity,
        rcs_dbsm: jittered_rcs(ObjectClass::Car, rng),
        points,
    })
}

fn pole(rng: &mut ChaCha8Rng, placer: &mut Placer) -> Result<SceneObject> {
    let (r, theta) = placer.place(rng, (POLE_EXTENT, POLE_EXTENT), "pole")?;
    Ok(SceneObject::pole(r, theta, jittered_rcs(ObjectClass::Pole, rng)))
}

fn clutter(rng: &mut ChaCha8Rng, placer: &mut Placer) -> Result<SceneObject> {
    let extent = (CLUTTER_EXTENT, CLUTTER_EXTENT);
    let (r, theta) = placer.place(rng, extent, "clutter")?;
    let fp = Footprint::around(polar_to_xy(r, theta), extent);
    let n = rng.random_range(1..=3usize);
    let points = (0..n)
        .map(|_| {
            let x = rng.random_range(fp.x.0..=fp.x.1);
            let y = rng.random_range(fp.y.0..=fp.y.1);
            let (pr, pa) = xy_to_polar(x, y);
            ReflectionPoint::new(pr, 0.0, pa, unit())
        })
        .collect();
    Ok(SceneObject {
        class_label: ObjectClass::Clutter,
        center: (r, theta),
        extent,
        radial_velocity_mps: 0.0,
        rcs_dbsm: jittered_rcs(ObjectClass::Clutter, rng),
        points,
    })
}

/// Seeded random scene. Scatterer amplitudes are left at 1; see
/// [`assign_amplitudes`].
pub fn generate_scene(spec: &SceneSpec, cfg: &RadarConfig) -> Result<AnnotatedScene> {
    validate_spec(spec, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut placer = Placer {
        spec,
        taken: Vec::new(),
    };
    let mut objects = Vec::new();
    for _ in 0..spec.n_cars {
        objects.push(car(&mut rng, &mut placer, spec)?);
    }
    for _ in 0..spec.n_poles {
        objects.push(pole(&mut rng, &mut placer)?);
    }
    if spec.clutter_density > 0.0 {
        let (rmin, rmax) = spec.range_span;
        let sector_area = (rmax * rmax - rmin * rmin) * spec.azimuth_span_deg.to_radians();
        let mean = spec.clutter_density * sector_area / 100.0;
        let count = Poisson::new(mean)
            .map_err(|e| SimError::InfeasibleScene(e.to_string()))?
            .sample(&mut rng) as usize;
        for _ in 0..count {
            objects.push(clutter(&mut rng, &mut placer)?);
        }
    }
    let boxes = objects
        .iter()
        .map(|o| bounding_box(o, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnnotatedScene {
        objects,
        boxes,
        seed: spec.seed,
    })
}

/// Set scatterer amplitudes from the object RCS and range:
/// `|a| = sqrt(10^(rcs/10) / N) * (R_ref / R)^2` with uniform random phase.
pub fn assign_amplitudes(scene: &AnnotatedScene, cfg: &RadarConfig) -> Result<AnnotatedScene> {
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    rng.set_stream(1);
    let mut out = scene.clone();
    for object in &mut out.objects {
        let n = object.points.len().max(1) as f64;
        let per_point = (10f64.powf(object.rcs_dbsm / 10.0) / n).sqrt();
        for p in &mut object.points {
            if p.range_m <= 0.0 {
                return Err(SimError::InvalidPoint {
                    field: "range_m",
                    value: p.range_m,
                    reason: "zero range has no defined path loss",
                });
            }
            let falloff = (cfg.reference_range_m / p.range_m).powi(2);
            let phase = rng.random_range(0.0..2.0 * PI);
            p.amplitude = Complex64::from_polar(per_point * falloff, phase);
        }
    }
    Ok(out)
}
