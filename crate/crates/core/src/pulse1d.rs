//! One-dimensional pulse-compression model: a single transmitted pulse, its
//! delayed echoes, and the match filter. The filter output equals the sum of
//! the pulse autocorrelation shifted to each echo delay.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, SimError};

/// Sampled correlation over lags `min_lag..min_lag + values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagSeries {
    pub min_lag: isize,
    pub values: Vec<Complex64>,
}

impl LagSeries {
    pub fn at(&self, lag: isize) -> Complex64 {
        let i = lag - self.min_lag;
        if i < 0 || i as usize >= self.values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }

    pub fn max_abs_difference(&self, other: &LagSeries) -> f64 {
        let lo = self.min_lag.min(other.min_lag);
        let hi = (self.min_lag + self.values.len() as isize).max(other.min_lag + other.values.len() as isize);
        (lo..hi).map(|l| (self.at(l) - other.at(l)).norm()).fold(0.0, f64::max)
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Linear-FM pulse `exp(j pi bt n^2 / len)`.
pub fn chirp_pulse(len: usize, time_bandwidth: f64) -> Vec<Complex64> {
    (0..len)
        .map(|n| {
            let t = n as f64;
            Complex64::from_polar(1.0, PI * time_bandwidth * t * t / (len * len) as f64)
        })
        .collect()
}

/// Echo of `pulse` from each `(delay, amplitude)` inside a `len`-sample
/// receive window.
pub fn received(pulse: &[Complex64], echoes: &[(usize, Complex64)], len: usize) -> Result<Vec<Complex64>> {
    let mut r = vec![Complex64::new(0.0, 0.0); len];
    for &(delay, alpha) in echoes {
        if delay + pulse.len() > len {
            return Err(SimError::InvalidConfig(format!(
                "echo at delay {delay} does not fit a {len}-sample window"
            )));
        }
        for (k, s) in pulse.iter().enumerate() {
            r[delay + k] += alpha * s;
        }
    }
    Ok(r)
}

/// `y(l) = sum_k r(l + k) conj(s(k))` for every lag with possible overlap,
/// computed by zero-padded FFT.
pub fn correlate(r: &[Complex64], s: &[Complex64]) -> LagSeries {
    let m = (r.len() + s.len()).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let pad = |x: &[Complex64]| {
        let mut v = x.to_vec();
        v.resize(m, Complex64::new(0.0, 0.0));
        v
    };
    let mut rf = pad(r);
    let mut sf = pad(s);
    fwd.process(&mut rf);
    fwd.process(&mut sf);
    let mut prod: Vec<Complex64> = rf.iter().zip(&sf).map(|(a, b)| a * b.conj()).collect();
    inv.process(&mut prod);
    let scale = (m as f64).recip();
    let min_lag = -(s.len() as isize - 1);
    let values = (min_lag..r.len() as isize)
        .map(|l| prod[l.rem_euclid(m as isize) as usize] * scale)
        .collect();
    LagSeries { min_lag, values }
}

/// Match-filter output of a received window.
pub fn match_filter(r: &[Complex64], pulse: &[Complex64]) -> LagSeries {
    correlate(r, pulse)
}

/// Autocorrelation of the pulse, lags `-(L-1)..L`: the 1D PSF.
pub fn autocorrelation(pulse: &[Complex64]) -> LagSeries {
    correlate(pulse, pulse)
}

/// Sum of the autocorrelation shifted to every echo delay, on the lag grid of
/// a `len`-sample match filter.
pub fn superposed_kernels(kernel: &LagSeries, echoes: &[(usize, Complex64)], pulse_len: usize, len: usize) -> LagSeries {
    let min_lag = -(pulse_len as isize - 1);
    let values = (min_lag..len as isize)
        .map(|l| {
            echoes
                .iter()
                .map(|&(delay, alpha)| alpha * kernel.at(l - delay as isize))
                .sum()
        })
        .collect();
    LagSeries { min_lag, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_correlation(r: &[Complex64], s: &[Complex64]) -> LagSeries {
        let min_lag = -(s.len() as isize - 1);
        let values = (min_lag..r.len() as isize)
            .map(|l| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, sk) in s.iter().enumerate() {
                    let i = l + k as isize;
                    if i >= 0 && (i as usize) < r.len() {
                        acc += r[i as usize] * sk.conj();
                    }
                }
                acc
            })
            .collect();
        LagSeries { min_lag, values }
    }

    #[test]
    fn fft_correlation_matches_loop() {
        let s = chirp_pulse(16, 8.0);
        let r: Vec<Complex64> = (0..40).map(|i| Complex64::new((i as f64).sin(), (0.3 * i as f64).cos())).collect();
        let fast = correlate(&r, &s);
        let slow = brute_correlation(&r, &s);
        assert!(fast.max_abs_difference(&slow) < 1e-12 * slow.peak_magnitude());
    }

    #[test]
    fn autocorrelation_peak_is_energy() {
        let s = chirp_pulse(32, 10.0);
        let x = autocorrelation(&s);
        assert!((x.at(0) - Complex64::new(32.0, 0.0)).norm() < 1e-12);
        assert!((x.at(5) - x.at(-5).conj()).norm() < 1e-12);
    }

    #[test]
    fn echo_outside_window_rejected() {
        let s = chirp_pulse(8, 2.0);
        assert!(received(&s, &[(10, Complex64::new(1.0, 0.0))], 16).is_err());
    }
}
