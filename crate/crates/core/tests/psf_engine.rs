use proptest::prelude::*;
use radsim_core::conventional::simulate_conventional_grid;
use radsim_core::noise::{add_complex_noise, NoiseDomain};
use radsim_core::psf::{
    analytic_psf, calibrate, estimate_noise_variance, kernel_response, measure_psf, truncate_psf, MeasureOptions,
    NoiseRegion,
};
use radsim_core::{Complex64, Exec, GridPoint, Preset, Psf, PsfSource, RadarConfig, Window};

fn unit_at(k: [f64; 3]) -> GridPoint {
    GridPoint {
        k,
        amplitude: Complex64::new(1.0, 0.0),
    }
}

fn relative_l2(a: &Psf, b: &Psf) -> f64 {
    assert_eq!(a.window_dims, b.window_dims);
    let num: f64 = a.cells.iter().zip(&b.cells).map(|(x, y)| (x - y).norm_sqr()).sum();
    (num / b.energy()).sqrt()
}

#[test]
fn raddet_truncation_reduces_by_over_1000() {
    let cfg = RadarConfig::preset(Preset::RaddetTi);
    let full = analytic_psf(&cfg).unwrap();
    let t = truncate_psf(&full, 0.99).unwrap();
    let reduction = cfg.cell_count() as f64 / t.cell_count() as f64;
    assert!(reduction >= 1000.0, "{reduction} {:?}", t.window_dims);

    // off-grid in the Hann-windowed range and Doppler axes
    let off_grid_reduction = |k: [f64; 3]| {
        let t = kernel_response(&cfg, k).unwrap();
        let peak = t.position(t.peak().0);
        let psf = Psf::centered_from_tensor(&t, peak, PsfSource::Measured);
        let w = truncate_psf(&psf, 0.99).unwrap();
        cfg.cell_count() as f64 / w.cell_count() as f64
    };
    let r = off_grid_reduction([25.0 / cfg.range_resolution, 0.3, 0.0]);
    assert!(r >= 1000.0, "{r}");
    // the 30-bin rectangular azimuth aperture leaks widely off-grid
    let r = off_grid_reduction([25.0 / cfg.range_resolution, 0.3, 0.4]);
    assert!((200.0..1000.0).contains(&r), "{r}");
}

#[test]
fn raddet_azimuth_spread_exceeds_range_spread() {
    let cfg = RadarConfig::preset(Preset::RaddetTi);
    for az_bin in [0.0, 0.37, 3.5] {
        let k = [25.0 / cfg.range_resolution, 0.0, az_bin];
        let t = kernel_response(&cfg, k).unwrap();
        let peak = t.position(t.peak().0);
        let psf = Psf::centered_from_tensor(&t, peak, PsfSource::Analytic);
        let az_fraction = psf.main_lobe_width(2) as f64 / cfg.n_azimuth as f64;
        let range_fraction = psf.main_lobe_width(0) as f64 / cfg.n_range as f64;
        assert!(az_fraction > range_fraction, "az {az_fraction} range {range_fraction}");
    }
}

#[test]
fn single_noiseless_frame_gives_exact_analytic_window() {
    let mut cfg = RadarConfig::preset(Preset::DeskSmall);
    cfg.range_window = Window::Hann;
    cfg.doppler_window = Window::Hann;
    let frame = simulate_conventional_grid(&[unit_at([20.0, 10.0, 5.0])], &cfg, Exec::Sequential).unwrap();
    let measured = measure_psf(&[frame], &cfg, &MeasureOptions::default()).unwrap();
    let analytic = truncate_psf(&analytic_psf(&cfg).unwrap(), 0.99).unwrap().normalized_to_peak().unwrap();
    assert_eq!(measured.window_dims, analytic.window_dims);
    assert_eq!(measured.source, PsfSource::Measured);
    assert!(relative_l2(&measured, &analytic) < 1e-12);
}

#[test]
fn strong_point_auto_noise_within_ten_percent() {
    let cfg = RadarConfig::preset(Preset::DeskSmall);
    let mut t = simulate_conventional_grid(&[unit_at([30.0, 4.0, 9.0])], &cfg, Exec::Sequential).unwrap();
    add_complex_noise(&mut t, 2.0, 8, NoiseDomain::Tensor, Exec::Sequential);
    let e = estimate_noise_variance(&t, &NoiseRegion::Auto).unwrap();
    assert!((e / 2.0 - 1.0).abs() < 0.1, "{e}");
}

#[test]
fn calibrate_reports_frame_count() {
    let cfg = RadarConfig::preset(Preset::DeskSmall);
    let frames: Vec<_> = (0..3)
        .map(|s| {
            let mut t = simulate_conventional_grid(&[unit_at([5.0, 5.0, 5.0])], &cfg, Exec::Sequential).unwrap();
            add_complex_noise(&mut t, 1.0, s, NoiseDomain::Tensor, Exec::Sequential);
            t
        })
        .collect();
    let b = calibrate(&frames, &cfg, &MeasureOptions::default()).unwrap();
    assert_eq!(b.frames_averaged, 3);
    assert!((b.psf.center_value() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!((b.noise_variance - 1.0).abs() < 0.05);
}

fn hann_cfg() -> RadarConfig {
    let mut cfg = RadarConfig::preset(Preset::DeskSmall);
    cfg.range_window = Window::Hann;
    cfg.azimuth_window = Window::Hann;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncation_is_monotone_and_energy_is_exact(
        f1 in 0.05f64..1.0,
        f2 in 0.05f64..1.0,
        k in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0),
    ) {
        let cfg = hann_cfg();
        let t = kernel_response(&cfg, [k.0, k.1, k.2]).unwrap();
        let full = Psf::centered_from_tensor(&t, [0, 0, 0], PsfSource::Analytic);
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let a = truncate_psf(&full, lo).unwrap();
        let b = truncate_psf(&full, hi).unwrap();
        for d in 0..3 {
            prop_assert!(a.window_dims[d] <= b.window_dims[d]);
        }
        for w in [&a, &b] {
            let direct: f64 = w.cells.iter().map(|c| c.norm_sqr()).sum::<f64>()
                / full.cells.iter().map(|c| c.norm_sqr()).sum::<f64>();
            prop_assert!((direct - w.retained_energy_fraction).abs() <= 1e-12);
        }
        prop_assert!(a.retained_energy_fraction >= lo - 1e-12);
        prop_assert!(b.retained_energy_fraction >= hi - 1e-12);
    }
}
