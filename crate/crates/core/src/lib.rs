//! Pseudo-spectral toolkit for the fifth-order KP-II equation
//! `u_t - d_x^5 u + d_x^{-1} d_y^2 u + u u_x = 0` on a periodic rectangle.
//!
//! Fields are stored as Fourier-series coefficients on a [`Grid2D`]. The
//! crate provides Gevrey and Sobolev multipliers, an integrating-factor RK4
//! stepper, a Picard solver for the Duhamel formulation on short windows, and
//! the diagnostics used to probe Gevrey-norm growth and the decay of the
//! radius of analyticity.

pub mod acceptance;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod initial;
pub mod integrator;
pub mod operators;
pub mod output;
pub mod par;
pub mod picard;
pub mod record;
pub mod spectral;

pub use config::{load_config, SimConfig};
pub use error::{Error, Result};
pub use initial::InitialData;
pub use record::DiagnosticsRecord;
pub use spectral::{Grid2D, PhysicalField, SpectralField};
