//! Radius of analyticity from the exponential decay rate of the spectrum.

use serde::{Deserialize, Serialize};

use super::fit_line;
use crate::error::{Error, Result};
use crate::spectral::{Grid2D, SpectralField};

/// Modes below this fraction of the peak coefficient are treated as noise.
pub const SPECTRAL_FLOOR: f64 = 1e-14;
/// Fewest lattice shells a fit may use.
pub const MIN_SHELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusFit {
    /// Decay rate in `x`, clamped at zero.
    pub sigma_est: f64,
    pub band: (f64, f64),
    /// RMS deviation of `ln E` from the fitted line.
    pub residual: f64,
    /// Same fit along `eta`, when that direction has enough support.
    pub slope_y: Option<f64>,
    pub shells: usize,
}

/// `(|frequency|, ln envelope)` for shells inside `band` above the floor.
fn shells(s: &SpectralField, band: (f64, f64), along_x: bool) -> Vec<(f64, f64)> {
    let g = *s.grid();
    let floor = SPECTRAL_FLOOR * s.max_abs_coeff();
    let (n, step) = if along_x { (g.nx, g.dxi()) } else { (g.ny, g.deta()) };
    let mut out = Vec::new();
    for q in 1..n / 2 {
        let freq = step * q as f64;
        if freq < band.0 || freq > band.1 {
            continue;
        }
        let mut env = 0.0_f64;
        for idx in [q, n - q] {
            if along_x {
                for k in 0..g.ny {
                    if g.is_dealiased(idx, k) {
                        env = env.max(s.at(idx, k).norm());
                    }
                }
            } else {
                for j in 0..g.nx {
                    if g.is_dealiased(j, idx) && g.kx(j) != 0 {
                        env = env.max(s.at(j, idx).norm());
                    }
                }
            }
        }
        if env > floor && env > 0.0 {
            out.push((freq, env.ln()));
        }
    }
    out
}

/// Fits `ln max_eta |c(xi, eta)| = a - sigma |xi|` over shells `|xi|` in `band`.
pub fn radius_estimate(s: &SpectralField, band: (f64, f64)) -> Result<RadiusFit> {
    let g = *s.grid();
    let top = g.max_dealiased_xi();
    if !(band.0 >= 0.0 && band.0 < band.1 && band.1 <= top * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter {
            name: "band",
            reason: format!(
                "need 0 <= lo < hi <= {top} (dealiased limit), got [{}, {}]",
                band.0, band.1
            ),
        });
    }
    let pts = shells(s, band, true);
    if pts.len() < MIN_SHELLS {
        return Err(Error::InsufficientSupport {
            usable: pts.len(),
            needed: MIN_SHELLS,
        });
    }
    let (slope, residual) = fit_line(&pts);
    let slope_y = y_band(&g, band).and_then(|b| {
        let ys = shells(s, b, false);
        (ys.len() >= MIN_SHELLS).then(|| (-fit_line(&ys).0).max(0.0))
    });
    Ok(RadiusFit {
        sigma_est: (-slope).max(0.0),
        band,
        residual,
        slope_y,
        shells: pts.len(),
    })
}

/// The x band mapped onto the eta axis by the same fractions of the
/// dealiased limit.
fn y_band(g: &Grid2D, band: (f64, f64)) -> Option<(f64, f64)> {
    let scale = g.max_dealiased_eta() / g.max_dealiased_xi();
    scale.is_finite().then_some((band.0 * scale, band.1 * scale))
}

/// Default band `[0.25, 0.75]` of the largest dealiased `|xi|`.
pub fn default_band(g: &Grid2D) -> (f64, f64) {
    let top = g.max_dealiased_xi();
    (0.25 * top, 0.75 * top)
}
