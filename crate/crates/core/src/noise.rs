//! Seeded circular complex Gaussian noise.
//!
//! Each range row draws from its own ChaCha8 stream keyed by `(seed, domain,
//! row)`, so the noise field is the same whichever execution mode fills it.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::exec::Exec;
use crate::tensor::RadarTensor;

/// Which stage the noise is injected at. Keeps the two pipelines' noise
/// fields independent for the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseDomain {
    Signal,
    Tensor,
}

impl NoiseDomain {
    fn tag(self) -> u64 {
        match self {
            NoiseDomain::Signal => 1 << 40,
            NoiseDomain::Tensor => 2 << 40,
        }
    }
}

/// Add i.i.d. CN(0, variance) samples to every cell.
pub fn add_complex_noise(t: &mut RadarTensor, variance: f64, seed: u64, domain: NoiseDomain, exec: Exec) {
    if variance == 0.0 {
        return;
    }
    let sigma = (0.5 * variance).sqrt();
    let row_len = t.row_len();
    exec.for_each_chunk(t.cells_mut(), row_len, |row, cells| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(domain.tag() | row as u64);
        for c in cells.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *c += Complex64::new(sigma * re, sigma * im);
        }
    });
}
