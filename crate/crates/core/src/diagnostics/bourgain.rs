//! Windowed space-time Fourier norms.
//!
//! A window of `M` slices (`M` a power of two) at `t_j = j dt` is multiplied
//! by the taper `psi(t) = c (1 - s^2)^3`, `s = 2t/T - 1`, a C^2 bump with
//! support `[0, T]` normalized so its discrete mean is 1. Each mode is then
//! demodulated by `exp(-i m t)` before the time DFT, so the stored frequency
//! is `tau - m(xi, eta)` directly and only the deviation from free evolution
//! has to be resolved by the time grid.
//!
//! Only modes inside the 2/3 band are carried; anything outside is dropped.
//!
//! Norms use `(lx ly / (M dt) sum lambda^2 |V|^2)^(1/2)`, so with all
//! exponents zero the result equals the space-time L^2 norm of the tapered
//! window.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::operators::{DispersionSymbol, GevreyParams};
use crate::par;
use crate::spectral::{fft_rows, transpose, Grid2D, SpectralField};

/// Exponents of `<xi>^s1 <eta>^s2 <tau - m>^b <(tau - m)/(1 + |xi|^5)>^eps`
/// times the Gevrey factor `exp(sigma1 |xi| + sigma2 |eta|)`. `b` may be
/// negative for dual norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BourgainWeight {
    pub s1: f64,
    pub s2: f64,
    pub b: f64,
    pub eps: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl BourgainWeight {
    pub fn primal(p: &GevreyParams) -> Self {
        Self {
            s1: p.s1,
            s2: p.s2,
            b: p.b,
            eps: p.eps,
            sigma1: p.sigma1,
            sigma2: p.sigma2,
        }
    }

    /// Same weight with `b` replaced by `-beta`.
    pub fn dual(p: &GevreyParams) -> Self {
        Self {
            b: -p.beta,
            ..Self::primal(p)
        }
    }

    fn log_at(&self, xi: f64, eta: f64, dtau: f64) -> f64 {
        let lj = |x: f64| 0.5 * x.mul_add(x, 1.0).ln();
        let mut w = self.s1 * lj(xi) + self.s2 * lj(eta) + self.b * lj(dtau);
        if self.eps != 0.0 {
            w += self.eps * lj(dtau / (1.0 + xi.abs().powi(5)));
        }
        w + self.sigma1 * xi.abs() + self.sigma2 * eta.abs()
    }
}

/// Tapered, demodulated time-frequency transform of a window of slices.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    grid: Grid2D,
    dt: f64,
    slices: usize,
    /// Lattice indices of the carried modes.
    live: Vec<usize>,
    /// Mode-major: entry `r * M + q` for carried mode `r`, DFT index `q`.
    spectrum: Vec<Complex64>,
}

const RESYNC: usize = 32;

/// `psi_j` for `j = 0..m`, scaled to unit discrete mean.
pub fn taper(m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m)
        .map(|j| {
            let s = 2.0 * j as f64 / m as f64 - 1.0;
            (1.0 - s * s).powi(3)
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / m as f64;
    raw.into_iter().map(|v| v / mean).collect()
}

impl SpaceTimeField {
    /// Builds `count` windows at once from `make(j)`, which returns the
    /// `count` slices at time `j dt`. The demodulation table is shared.
    pub fn build_many(
        grid: Grid2D,
        dt: f64,
        slices: usize,
        count: usize,
        mut make: impl FnMut(usize, f64) -> Result<Vec<SpectralField>>,
    ) -> Result<Vec<Self>> {
        if slices < 2 || !slices.is_power_of_two() {
            return Err(Error::InvalidParameter {
                name: "slices",
                reason: format!("{slices} is not a power of two >= 2"),
            });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("{dt} must be > 0"),
            });
        }
        let psi = taper(slices);
        let sym = DispersionSymbol::new(grid);
        let live: Vec<usize> = (0..grid.len())
            .filter(|&i| {
                let (j, k) = (i / grid.ny, i % grid.ny);
                grid.is_dealiased(j, k) && !grid.is_nyquist(j, k)
            })
            .collect();
        let rotate: Vec<Complex64> = {
            let full = sym.phases(-dt);
            live.iter().map(|&i| full[i]).collect()
        };
        let mut phase: Vec<Complex64> = Vec::new();
        // slice-major while filling, so every write is contiguous
        let mut rows: Vec<Vec<Complex64>> = (0..count).map(|_| Vec::with_capacity(live.len() * slices)).collect();
        for (j, &weight) in psi.iter().enumerate() {
            let t = dt * j as f64;
            // exact table every RESYNC slices, unit rotations in between
            if j % RESYNC == 0 {
                let full = sym.phases(-t);
                phase = live.iter().map(|&i| full[i]).collect();
            } else {
                for (p, r) in phase.iter_mut().zip(&rotate) {
                    *p *= r;
                }
            }
            let fields = make(j, t)?;
            if fields.len() != count {
                return Err(Error::InvalidParameter {
                    name: "count",
                    reason: format!("expected {count} slices, got {}", fields.len()),
                });
            }
            let scale = dt * weight;
            for (buf, field) in rows.iter_mut().zip(&fields) {
                grid.ensure_same(field.grid())?;
                let c = field.coeffs();
                buf.extend(live.iter().zip(&phase).map(|(&i, p)| c[i] * p * scale));
            }
        }
        Ok(rows
            .into_iter()
            .map(|by_slice| {
                let mut spectrum = vec![Complex64::default(); by_slice.len()];
                transpose(&by_slice, &mut spectrum, slices, live.len());
                drop(by_slice);
                fft_rows(&mut spectrum, slices, FftDirection::Forward);
                Self {
                    grid,
                    dt,
                    slices,
                    live: live.clone(),
                    spectrum,
                }
            })
            .collect())
    }

    pub fn from_fn(
        grid: Grid2D,
        dt: f64,
        slices: usize,
        mut make: impl FnMut(usize, f64) -> Result<SpectralField>,
    ) -> Result<Self> {
        let mut v = Self::build_many(grid, dt, slices, 1, |j, t| Ok(vec![make(j, t)?]))?;
        Ok(v.pop().expect("one window requested"))
    }

    /// Window from explicit slices at `t_j = j dt`.
    pub fn from_slices(slices: &[SpectralField], dt: f64) -> Result<Self> {
        let grid = *slices
            .first()
            .ok_or(Error::InvalidParameter {
                name: "slices",
                reason: "empty window".into(),
            })?
            .grid();
        Self::from_fn(grid, dt, slices.len(), |j, _| Ok(slices[j].clone()))
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn slice_count(&self) -> usize {
        self.slices
    }

    pub fn window(&self) -> f64 {
        self.dt * self.slices as f64
    }

    /// `tau - m` at DFT index `q`.
    pub fn detuning(&self, q: usize) -> f64 {
        let m = self.slices;
        let signed = if q < m / 2 { q as f64 } else { q as f64 - m as f64 };
        2.0 * std::f64::consts::PI * signed / self.window()
    }

    /// Lattice indices (`j * ny + k`) of the carried modes, in row order.
    pub fn live_modes(&self) -> &[usize] {
        &self.live
    }

    /// Mode-major transform: row `r` belongs to `live_modes()[r]`.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }
}

/// Weighted space-time norm of a window.
///
/// The temporal factor is tabulated once per DFT index; each mode's row sum
/// is then combined in log space with its spatial and Gevrey factor.
pub fn bourgain_norm_weighted(w: &SpaceTimeField, weight: &BourgainWeight) -> Result<f64> {
    let g = w.grid;
    g.check_gevrey(weight.sigma1, weight.sigma2)?;
    let m = w.slices;
    let detune: Vec<f64> = (0..m).map(|q| w.detuning(q)).collect();
    let temporal: Vec<f64> = detune.iter().map(|d| d.mul_add(*d, 1.0).powf(weight.b)).collect();
    let spatial = BourgainWeight {
        b: 0.0,
        eps: 0.0,
        ..*weight
    };
    let log_rows = par::map_rows(&w.spectrum, m, |r, row| {
        let i = w.live[r];
        let (j, k) = (i / g.ny, i % g.ny);
        let xi = g.xi(j);
        let sum: f64 = if weight.eps == 0.0 {
            row.iter().zip(&temporal).map(|(c, t)| t * c.norm_sqr()).sum()
        } else {
            let scale = 1.0 + xi.abs().powi(5);
            row.iter()
                .zip(&temporal)
                .zip(&detune)
                .map(|((c, t), d)| {
                    let r = d / scale;
                    t * r.mul_add(r, 1.0).powf(weight.eps) * c.norm_sqr()
                })
                .sum()
        };
        if sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            2.0 * spatial.log_at(xi, g.eta(k), 0.0) + sum.ln()
        }
    });
    let lmax = log_rows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lmax == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let rel: f64 = log_rows.iter().map(|l| (l - lmax).exp()).sum();
    Ok((0.5 * lmax).exp() * (g.area() * rel / w.window()).sqrt())
}

/// `||w||_{X^{s1, s2, b, eps}}` with the Gevrey pre-weight of `p`, which
/// realizes the `Y^{sigma1, sigma2, b}` norm when `s1 = s2 = eps = 0`.
pub fn bourgain_norm(w: &SpaceTimeField, p: &GevreyParams) -> Result<f64> {
    bourgain_norm_weighted(w, &BourgainWeight::primal(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialData;
    use crate::operators::{semigroup_apply, sobolev_norm};
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::square(16, 8.0 * PI).unwrap()
    }

    fn zero_weight() -> BourgainWeight {
        BourgainWeight {
            s1: 0.0,
            s2: 0.0,
            b: 0.0,
            eps: 0.0,
            sigma1: 0.0,
            sigma2: 0.0,
        }
    }

    #[test]
    fn taper_has_unit_mean_and_vanishes_at_ends() {
        let psi = taper(64);
        assert!((psi.iter().sum::<f64>() / 64.0 - 1.0).abs() < 1e-14);
        assert_eq!(psi[0], 0.0);
    }

    #[test]
    fn unweighted_norm_is_spacetime_l2() {
        let g = grid();
        let f = InitialData::default().build(&g).unwrap();
        let dt = 0.05;
        let m = 32;
        let slices: Vec<SpectralField> = (0..m)
            .map(|j| {
                let t = dt * j as f64;
                f.scaled(1.0 + (3.0 * t).sin())
            })
            .collect();
        let w = SpaceTimeField::from_slices(&slices, dt).unwrap();
        let psi = taper(m);
        let direct: f64 = slices
            .iter()
            .zip(&psi)
            .map(|(s, p)| dt * (p * s.l2_norm()).powi(2))
            .sum::<f64>()
            .sqrt();
        let got = bourgain_norm_weighted(&w, &zero_weight()).unwrap();
        assert!((got - direct).abs() < 1e-12 * direct, "{got} vs {direct}");
    }

    #[test]
    fn free_wave_sits_on_the_characteristic() {
        let g = grid();
        let f = InitialData::default().build(&g).unwrap();
        let dt = 1.0 / 8.0;
        let m = 512;
        let w = SpaceTimeField::from_fn(g, dt, m, |_, t| Ok(semigroup_apply(&f, t))).unwrap();
        let flat = bourgain_norm_weighted(&w, &zero_weight()).unwrap();
        let weighted = bourgain_norm_weighted(
            &w,
            &BourgainWeight {
                b: 0.55,
                s1: -1.0,
                ..zero_weight()
            },
        )
        .unwrap();
        let expected = flat * sobolev_norm(&f, -1.0, 0.0) / f.l2_norm();
        assert!((weighted / expected - 1.0).abs() < 0.02, "{weighted} vs {expected}");
    }

    #[test]
    fn monotone_in_b() {
        let g = grid();
        let f = InitialData::default().build(&g).unwrap();
        let w = SpaceTimeField::from_fn(g, 0.1, 16, |_, t| Ok(f.scaled((2.0 * t).cos()))).unwrap();
        let mut last = 0.0;
        for b in [-0.45, 0.0, 0.3, 0.55, 0.9] {
            let n = bourgain_norm_weighted(&w, &BourgainWeight { b, ..zero_weight() }).unwrap();
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let g = grid();
        assert!(SpaceTimeField::from_fn(g, 0.1, 12, |_, _| Ok(SpectralField::zeros(g))).is_err());
    }
}
