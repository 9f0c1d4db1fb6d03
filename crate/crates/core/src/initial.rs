//! Initial-data library. Every profile is projected to zero x-mean and
//! dealiased, so it lies in the domain of the `d_x^{-1}` term and the
//! quadratic nonlinearity stays alias-free.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid2D, PhysicalField, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `a exp(-r^2 / w^2)` centred in the domain.
    Gaussian { amplitude: f64, width: f64 },
    /// x-derivative of a centred Gaussian, rescaled to peak `amplitude`.
    GaussianDx { amplitude: f64, width: f64 },
    /// `a sech^2((x - xc) / w) (1 + modulation cos(2 pi y / ly))`.
    LineSoliton {
        amplitude: f64,
        width: f64,
        modulation: f64,
    },
    /// Coefficients `exp(-sigma |xi| - rho |eta|)`, rescaled to peak `amplitude`.
    ExpSpectrum { amplitude: f64, sigma: f64, rho: f64 },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Gaussian {
            amplitude: 0.5,
            width: 4.0,
        }
    }
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} is not finite"),
                })
            }
        };
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} must be > 0"),
                })
            }
        };
        match *self {
            InitialData::Gaussian { amplitude, width } | InitialData::GaussianDx { amplitude, width } => {
                finite("amplitude", amplitude)?;
                positive("width", width)
            }
            InitialData::LineSoliton {
                amplitude,
                width,
                modulation,
            } => {
                finite("amplitude", amplitude)?;
                finite("modulation", modulation)?;
                positive("width", width)
            }
            InitialData::ExpSpectrum { amplitude, sigma, rho } => {
                finite("amplitude", amplitude)?;
                positive("sigma", sigma)?;
                if !(rho.is_finite() && rho >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "rho",
                        reason: format!("{rho} must be >= 0"),
                    });
                }
                Ok(())
            }
        }
    }

    /// Planted x-radius of analyticity, when the profile has one.
    pub fn native_sigma(&self) -> Option<f64> {
        match *self {
            InitialData::ExpSpectrum { sigma, .. } => Some(sigma),
            _ => None,
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            InitialData::Gaussian { amplitude, .. }
            | InitialData::GaussianDx { amplitude, .. }
            | InitialData::LineSoliton { amplitude, .. }
            | InitialData::ExpSpectrum { amplitude, .. } => amplitude,
        }
    }

    pub fn with_amplitude(mut self, a: f64) -> Self {
        match &mut self {
            InitialData::Gaussian { amplitude, .. }
            | InitialData::GaussianDx { amplitude, .. }
            | InitialData::LineSoliton { amplitude, .. }
            | InitialData::ExpSpectrum { amplitude, .. } => *amplitude = a,
        }
        self
    }

    pub fn build(&self, grid: &Grid2D) -> Result<SpectralField> {
        self.validate()?;
        let g = *grid;
        let (xc, yc) = (0.5 * g.lx, 0.5 * g.ly);
        let raw = match *self {
            InitialData::Gaussian { amplitude, width } => PhysicalField::from_fn(g, move |x, y| {
                let r2 = (x - xc).powi(2) + (y - yc).powi(2);
                amplitude * (-r2 / (width * width)).exp()
            })?
            .forward(),
            InitialData::GaussianDx { amplitude, width } => {
                // peak of |s exp(-s^2)| is exp(-1/2) / sqrt(2) at s = 1/sqrt(2)
                let norm = (2.0_f64).sqrt() * 0.5_f64.exp();
                PhysicalField::from_fn(g, move |x, y| {
                    let (sx, sy) = ((x - xc) / width, (y - yc) / width);
                    -amplitude * norm * sx * (-(sx * sx + sy * sy)).exp()
                })?
                .forward()
            }
            InitialData::LineSoliton {
                amplitude,
                width,
                modulation,
            } => PhysicalField::from_fn(g, move |x, y| {
                let sech = 1.0 / ((x - xc) / width).cosh();
                let m = 1.0 + modulation * (2.0 * std::f64::consts::PI * y / g.ly).cos();
                amplitude * sech * sech * m
            })?
            .forward(),
            InitialData::ExpSpectrum { amplitude, sigma, rho } => {
                let s = SpectralField::from_modes(g, move |kx, ky| {
                    if kx == 0 {
                        return Complex64::default();
                    }
                    let xi = g.dxi() * kx.abs() as f64;
                    let eta = g.deta() * ky.abs() as f64;
                    Complex64::new((-sigma * xi - rho * eta).exp(), 0.0)
                })?
                .dealias();
                let peak = s.inverse()?.max_abs();
                return Ok(if peak > 0.0 { s.scaled(amplitude / peak) } else { s });
            }
        };
        Ok(raw.project_zero_x_mean().dealias())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profiles_satisfy_constraints() {
        let g = Grid2D::square(32, 16.0 * PI).unwrap();
        for d in [
            InitialData::default(),
            InitialData::GaussianDx {
                amplitude: 1.0,
                width: 3.0,
            },
            InitialData::LineSoliton {
                amplitude: 0.4,
                width: 2.0,
                modulation: 0.2,
            },
            InitialData::ExpSpectrum {
                amplitude: 0.1,
                sigma: 1.0,
                rho: 0.5,
            },
        ] {
            let s = d.build(&g).unwrap();
            assert!(s.is_hermitian() && s.is_zero_x_mean(), "{d:?}");
            assert_eq!(s.dealias(), s);
            assert!(s.l2_norm() > 0.0);
        }
    }

    #[test]
    fn exp_spectrum_peak_is_amplitude() {
        let g = Grid2D::square(32, 16.0 * PI).unwrap();
        let s = InitialData::ExpSpectrum {
            amplitude: 0.3,
            sigma: 1.0,
            rho: 1.0,
        }
        .build(&g)
        .unwrap();
        assert!((s.inverse().unwrap().max_abs() - 0.3).abs() < 1e-12);
        let ratio = s.mode(2, 0).re / s.mode(1, 0).re;
        assert!((ratio - (-g.dxi()).exp()).abs() < 1e-14);
    }

    #[test]
    fn gaussian_dx_has_requested_peak() {
        let g = Grid2D::square(128, 16.0 * PI).unwrap();
        let p = InitialData::GaussianDx {
            amplitude: 0.7,
            width: 4.0,
        }
        .build(&g)
        .unwrap()
        .inverse()
        .unwrap();
        assert!((p.max_abs() - 0.7).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = Grid2D::square(8, 1.0).unwrap();
        assert!(InitialData::Gaussian {
            amplitude: 1.0,
            width: 0.0
        }
        .build(&g)
        .is_err());
        assert!(InitialData::ExpSpectrum {
            amplitude: 1.0,
            sigma: 1.0,
            rho: -1.0
        }
        .build(&g)
        .is_err());
    }
}
