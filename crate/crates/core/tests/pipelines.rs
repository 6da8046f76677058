use std::f64::consts::TAU;

use proptest::prelude::*;
use radsim_core::conventional::{match_filter_with, simulate_conventional_grid, simulate_conventional_with, synthesize_grid};
use radsim_core::fast::{simulate_fast_grid, simulate_fast_with, superpose_shifted_psf, Placement};
use radsim_core::grid::cell_to_point;
use radsim_core::noise::{add_complex_noise, NoiseDomain};
use radsim_core::psf::analytic_psf;
use radsim_core::{Complex64, Exec, GridPoint, Preset, RadarConfig, RadarTensor, TensorKind, Window};

fn desk() -> RadarConfig {
    RadarConfig::preset(Preset::DeskSmall)
}

fn point(k: [usize; 3], re: f64, im: f64) -> GridPoint {
    GridPoint {
        k: k.map(|v| v as f64),
        amplitude: Complex64::new(re, im),
    }
}

/// Direct DFT of one output cell: +j sign, 1/sqrt(N) per axis, windowed input.
fn direct_dft_cell(raw: &RadarTensor, windows: [Window; 3], out: [usize; 3]) -> Complex64 {
    let [nr, nd, na] = raw.dims();
    let [wr, wd, wa] = [windows[0].coefficients(nr), windows[1].coefficients(nd), windows[2].coefficients(na)];
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..nr {
        for m in 0..nd {
            for q in 0..na {
                let phase = TAU
                    * ((n * out[0]) as f64 / nr as f64
                        + (m * out[1]) as f64 / nd as f64
                        + (q * out[2]) as f64 / na as f64);
                acc += raw.get(n, m, q) * (wr[n] * wd[m] * wa[q]) * Complex64::from_polar(1.0, phase);
            }
        }
    }
    acc / ((nr * nd * na) as f64).sqrt()
}

fn random_raw(dims: [usize; 3], seed: u64) -> RadarTensor {
    let mut t = RadarTensor::zeros(dims, TensorKind::RawSignal);
    add_complex_noise(&mut t, 1.0, seed, NoiseDomain::Signal, Exec::Sequential);
    t
}

#[test]
fn fft_matches_direct_dft_on_small_grid() {
    let mut cfg = desk();
    cfg.n_range = 6;
    cfg.n_doppler = 4;
    cfg.n_azimuth = 5;
    for windows in [[Window::Rectangular; 3], [Window::Hann, Window::Hann, Window::Rectangular]] {
        [cfg.range_window, cfg.doppler_window, cfg.azimuth_window] = windows;
        let raw = random_raw(cfg.dims(), 11);
        let y = match_filter_with(&raw, &cfg, Exec::Sequential).unwrap();
        let mut num = 0.0;
        for i in 0..y.len() {
            let c = y.position(i);
            num += (y.cells()[i] - direct_dft_cell(&raw, windows, c)).norm_sqr();
        }
        assert!(num.sqrt() <= 1e-9 * y.frobenius_norm(), "{windows:?}");
    }
}

#[test]
fn fft_matches_direct_dft_on_desk_small_sample() {
    let cfg = desk();
    let raw = random_raw(cfg.dims(), 5);
    let y = match_filter_with(&raw, &cfg, Exec::default()).unwrap();
    let mut state = 1u64;
    for _ in 0..48 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let i = (state >> 33) as usize % y.len();
        let c = y.position(i);
        let d = direct_dft_cell(&raw, cfg.windows(), c);
        assert!((y.cells()[i] - d).norm() <= 1e-9 * d.norm().max(1.0), "cell {c:?}");
    }
}

#[test]
fn dc_and_on_grid_examples() {
    let cfg = desk();
    let ones = RadarTensor::from_cells(cfg.dims(), TensorKind::RawSignal, vec![Complex64::new(1.0, 0.0); cfg.cell_count()]).unwrap();
    let y = match_filter_with(&ones, &cfg, Exec::Sequential).unwrap();
    assert!((y.get(0, 0, 0) - Complex64::new(256.0, 0.0)).norm() < 1e-9);
    assert!(y.cells()[1..].iter().all(|c| c.norm() < 1e-9));

    let y = simulate_conventional_grid(&[point([10, 5, 3], 1.0, 0.0)], &cfg, Exec::Sequential).unwrap();
    let (peak, mag) = y.peak();
    assert_eq!(y.position(peak), [10, 5, 3]);
    assert!((mag - 256.0).abs() < 1e-9);
    for (i, c) in y.cells().iter().enumerate() {
        if i != peak {
            assert!(c.norm() <= 1e-9);
        }
    }
}

#[test]
fn three_point_scene_is_superposition_of_shifted_psfs() {
    let mut cfg = desk();
    cfg.range_window = Window::Hann;
    cfg.azimuth_window = Window::Hann;
    let pts = [
        point([12, 3, 2], 1.0, 0.0),
        point([30, 28, 20], -0.5, 0.7),
        point([50, 16, 9], 0.2, -0.3),
    ];
    let conv = simulate_conventional_grid(&pts, &cfg, Exec::Sequential).unwrap();
    let psf = analytic_psf(&cfg).unwrap();
    let mut expected = RadarTensor::zeros(cfg.dims(), TensorKind::Filtered);
    for p in &pts {
        superpose_shifted_psf(&mut expected, p.nearest_cell(cfg.dims()), p.amplitude, &psf);
    }
    assert!(conv.relative_distance(&expected).unwrap() < 1e-12);
}

#[test]
fn single_point_equals_shifted_psf_through_public_api() {
    let cfg = desk();
    let pt = cell_to_point([20, 7, 30], Complex64::new(0.3, 0.4), &cfg);
    let psf = analytic_psf(&cfg).unwrap();
    let conv = simulate_conventional_with(&[pt], &cfg, false, Exec::Sequential).unwrap();
    let fast = simulate_fast_with(&[pt], &psf, &cfg, false, Placement::Nearest, Exec::Sequential).unwrap();
    assert!(fast.relative_distance(&conv).unwrap() < 1e-9);
    assert_eq!(conv.position(conv.peak().0), [20, 7, 30]);
}

#[test]
fn parseval() {
    let cfg = desk();
    let raw = random_raw(cfg.dims(), 99);
    let y = match_filter_with(&raw, &cfg, Exec::Sequential).unwrap();
    assert!((raw.energy() - y.energy()).abs() <= 1e-9 * raw.energy());
}

#[test]
fn noise_calibration_both_domains() {
    let cfg = desk();
    let mut clean = cfg.clone();
    clean.rng_seed = 17;
    let conv = simulate_conventional_with(&[], &clean, true, Exec::default()).unwrap();
    let psf = analytic_psf(&cfg).unwrap();
    let fast = simulate_fast_with(&[], &psf, &clean, true, Placement::Nearest, Exec::default()).unwrap();
    for t in [&conv, &fast] {
        let var = t.energy() / t.len() as f64;
        assert!((var - 1.0).abs() <= 0.03, "{var}");
    }
}

#[test]
fn sequential_and_parallel_are_bit_identical() {
    let mut cfg = desk();
    cfg.range_window = Window::Hann;
    cfg.rng_seed = 123;
    let pts: Vec<_> = (0..20)
        .map(|i| cell_to_point([(i * 7) % 64, (i * 5) % 32, (i * 3) % 15], Complex64::from_polar(1.0, i as f64), &cfg))
        .collect();
    let psf = analytic_psf(&cfg).unwrap();
    let a = simulate_conventional_with(&pts, &cfg, true, Exec::Sequential).unwrap();
    let b = simulate_conventional_with(&pts, &cfg, true, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    let a = simulate_fast_with(&pts, &psf, &cfg, true, Placement::Splat, Exec::Sequential).unwrap();
    let b = simulate_fast_with(&pts, &psf, &cfg, true, Placement::Splat, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    let c = simulate_fast_with(&pts, &psf, &cfg, true, Placement::Splat, Exec::Sequential).unwrap();
    assert_eq!(a, c);
}

#[test]
fn different_seeds_give_different_noise() {
    let mut cfg = desk();
    let a = simulate_conventional_with(&[], &cfg, true, Exec::default()).unwrap();
    cfg.rng_seed = 1;
    let b = simulate_conventional_with(&[], &cfg, true, Exec::default()).unwrap();
    assert_ne!(a, b);
}

fn arb_points(max: usize) -> impl Strategy<Value = Vec<GridPoint>> {
    proptest::collection::vec(
        (0..64usize, 0..32usize, 0..32usize, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(r, d, a, re, im)| point([r, d, a], re, im)),
        0..max,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linearity(a in arb_points(8), b in arb_points(8)) {
        let cfg = desk();
        let ta = simulate_conventional_grid(&a, &cfg, Exec::Sequential).unwrap();
        let tb = simulate_conventional_grid(&b, &cfg, Exec::Sequential).unwrap();
        let all: Vec<_> = a.iter().chain(&b).copied().collect();
        let tab = simulate_conventional_grid(&all, &cfg, Exec::Sequential).unwrap();
        let mut sum = ta.clone();
        sum.add_assign(&tb).unwrap();
        let scale = tab.frobenius_norm().max(1e-300);
        let diff = tab.relative_distance(&sum).unwrap();
        prop_assert!(diff <= 1e-12 || scale < 1e-9);
    }

    #[test]
    fn amplitude_scaling(a in arb_points(6), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let cfg = desk();
        let c = Complex64::new(re, im);
        let t = simulate_conventional_grid(&a, &cfg, Exec::Sequential).unwrap();
        let scaled: Vec<_> = a.iter().map(|p| GridPoint { k: p.k, amplitude: p.amplitude * c }).collect();
        let ts = simulate_conventional_grid(&scaled, &cfg, Exec::Sequential).unwrap();
        let expect = t.scaled(c);
        prop_assert!(ts.max_abs_difference(&expect).unwrap() <= 1e-9 * (1.0 + expect.peak().1));
    }

    #[test]
    fn fast_full_psf_matches_conventional(a in arb_points(10)) {
        let cfg = desk();
        let psf = analytic_psf(&cfg).unwrap();
        let conv = simulate_conventional_grid(&a, &cfg, Exec::Sequential).unwrap();
        let fast = simulate_fast_grid(&a, &psf, cfg.dims(), Placement::Nearest, Exec::Sequential).unwrap();
        prop_assert!(fast.relative_distance(&conv).unwrap() <= 1e-9);
    }
}

#[test]
fn raw_synthesis_of_off_grid_point_is_unit_modulus() {
    let g = GridPoint {
        k: [3.3, 1.7, 0.25],
        amplitude: Complex64::new(1.0, 0.0),
    };
    let raw = synthesize_grid(&[g], [8, 4, 4], Exec::Sequential);
    assert!(raw.cells().iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
}
