//! Discrete Fourier representation of fields on a periodic rectangle.

mod fft;
mod field;
mod grid;
pub mod snapshot;

pub(crate) use fft::{fft_rows, transpose};
pub use field::{forward_transform, inverse_transform, PhysicalField, SpectralField, XI_ZERO_MASS_TOLERANCE};
pub use grid::{Grid2D, WEIGHT_EXPONENT_LIMIT};
