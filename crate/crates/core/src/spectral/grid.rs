use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent ceiling for Gevrey weights, below the f64 limit of ~709.
pub const WEIGHT_EXPONENT_LIMIT: f64 = 650.0;

/// Periodic rectangle `[0, lx) x [0, ly)` sampled on an `nx x ny` lattice.
///
/// Spectral arrays are stored row-major with the x-frequency index as the row,
/// both axes in FFT order: storage index `i` holds wavenumber `i` for
/// `i < n/2` and `i - n` otherwise. The Nyquist index `n/2` is never populated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!("{name} = {n} must be an even integer >= 4")));
            }
        }
        for (name, l) in [("lx", lx), ("ly", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be finite and > 0")));
            }
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// Square `n x n` grid on `[0, l)^2`.
    pub fn square(n: usize, l: f64) -> Result<Self> {
        Self::new(n, n, l, l)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.lx
    }

    pub fn deta(&self) -> f64 {
        2.0 * PI / self.ly
    }

    /// Lattice measure `dxi * deta` of one Fourier mode.
    pub fn mode_measure(&self) -> f64 {
        self.dxi() * self.deta()
    }

    /// Domain area `lx * ly`; scales coefficient sums into L^2 norms.
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Signed wavenumber of storage index `i` along an axis of length `n`.
    #[inline]
    pub fn signed(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Storage index of signed wavenumber `k` along an axis of length `n`.
    #[inline]
    pub fn index_of(k: i64, n: usize) -> usize {
        k.rem_euclid(n as i64) as usize
    }

    #[inline]
    pub fn kx(&self, j: usize) -> i64 {
        Self::signed(j, self.nx)
    }

    #[inline]
    pub fn ky(&self, k: usize) -> i64 {
        Self::signed(k, self.ny)
    }

    #[inline]
    pub fn xi(&self, j: usize) -> f64 {
        self.dxi() * self.kx(j) as f64
    }

    #[inline]
    pub fn eta(&self, k: usize) -> f64 {
        self.deta() * self.ky(k) as f64
    }

    #[inline]
    pub fn is_nyquist(&self, j: usize, k: usize) -> bool {
        j == self.nx / 2 || k == self.ny / 2
    }

    /// 2/3-rule: a mode survives iff `3|j| <= nx` and `3|k| <= ny`.
    #[inline]
    pub fn is_dealiased(&self, j: usize, k: usize) -> bool {
        3 * self.kx(j).unsigned_abs() as usize <= self.nx && 3 * self.ky(k).unsigned_abs() as usize <= self.ny
    }

    /// Index of the mirror mode `(-kx, -ky)`.
    #[inline]
    pub fn mirror(&self, j: usize, k: usize) -> (usize, usize) {
        ((self.nx - j) % self.nx, (self.ny - k) % self.ny)
    }

    /// Largest populated `|xi|` (Nyquist excluded).
    pub fn max_abs_xi(&self) -> f64 {
        self.dxi() * (self.nx / 2 - 1) as f64
    }

    pub fn max_abs_eta(&self) -> f64 {
        self.deta() * (self.ny / 2 - 1) as f64
    }

    /// Largest `|xi|` that survives dealiasing.
    pub fn max_dealiased_xi(&self) -> f64 {
        self.dxi() * (self.nx / 3) as f64
    }

    pub fn max_dealiased_eta(&self) -> f64 {
        self.deta() * (self.ny / 3) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.dx() * i as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        self.dy() * i as f64
    }

    /// Rejects Gevrey radii whose largest weight exponent exceeds the guard.
    pub fn check_gevrey(&self, sigma1: f64, sigma2: f64) -> Result<()> {
        for (name, s) in [("sigma1", sigma1), ("sigma2", sigma2)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{s} must be finite and >= 0"),
                });
            }
        }
        let exponent = sigma1 * self.max_abs_xi() + sigma2 * self.max_abs_eta();
        if exponent > WEIGHT_EXPONENT_LIMIT {
            return Err(Error::OverflowGuard {
                limit: WEIGHT_EXPONENT_LIMIT,
                max_sigma1: self.max_sigma1(sigma2),
            });
        }
        Ok(())
    }

    /// Maximal admissible `sigma1` for a given `sigma2`.
    pub fn max_sigma1(&self, sigma2: f64) -> f64 {
        ((WEIGHT_EXPONENT_LIMIT - sigma2 * self.max_abs_eta()) / self.max_abs_xi()).max(0.0)
    }

    pub(crate) fn ensure_same(&self, other: &Grid2D) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch {
                expected: format!("{self:?}"),
                found: format!("{other:?}"),
            });
        }
        Ok(())
    }
}
