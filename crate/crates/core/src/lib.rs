//! Radar tensor simulation by signal-level synthesis and by sparse
//! convolution with the radar's point spread function.
//!
//! The two pipelines:
//!
//! * [`conventional`]: synthesize received samples for every reflection
//!   point, then match-filter them into a range x Doppler x azimuth tensor.
//! * [`fast`]: place every point on the grid and add a shifted, scaled copy
//!   of the (truncated) PSF, then add tensor-domain noise.
//!
//! For on-grid points and the full PSF the outputs are identical; the fast
//! path costs `O(N_p * N_f)` instead of `O(N_p * N_s)`.

pub mod bench;
pub mod config;
pub mod conventional;
pub mod error;
pub mod exec;
pub mod fast;
pub mod grid;
pub mod imaging;
pub mod io;
pub mod noise;
pub mod psf;
pub mod pulse1d;
pub mod scene;
pub mod tensor;

pub use config::{Preset, RadarConfig, Window};
pub use error::{Result, SimError};
pub use exec::Exec;
pub use grid::{map_point_to_grid, GridPoint, ReflectionPoint};
pub use psf::{CalibrationBundle, Psf, PsfSource};
pub use tensor::{RadarTensor, TensorKind};

pub use num_complex::Complex64;
