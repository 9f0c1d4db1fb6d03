//! Fourier multipliers and weighted norms: the Gevrey weight `A^{s1,s2}`, the
//! dispersion symbol and its unitary group, anisotropic Sobolev and Gevrey
//! norms, and the commutator remainder `N(u) = d_x[(Au)^2 - A(u^2)]`.
//!
//! All exponential weights are handled as logarithms. Norms are accumulated
//! relative to the largest weighted term, so no intermediate ever exceeds the
//! f64 range while the weight exponent respects
//! [`WEIGHT_EXPONENT_LIMIT`](crate::spectral::WEIGHT_EXPONENT_LIMIT).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{Grid2D, SpectralField};

/// Radii and Bourgain exponents shared by every weight evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub s1: f64,
    pub s2: f64,
    pub b: f64,
    pub beta: f64,
    pub eps: f64,
}

impl Default for GevreyParams {
    /// `(s1, s2, b, beta, eps) = (-1, 0, 0.55, 9/20, 0)` with zero radii.
    fn default() -> Self {
        Self {
            sigma1: 0.0,
            sigma2: 0.0,
            s1: -1.0,
            s2: 0.0,
            b: 0.55,
            beta: 0.45,
            eps: 0.0,
        }
    }
}

impl GevreyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        for (name, v) in [
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("s1", self.s1),
            ("s2", self.s2),
            ("b", self.b),
            ("beta", self.beta),
            ("eps", self.eps),
        ] {
            if !v.is_finite() {
                return bad(name, format!("{v} is not finite"));
            }
        }
        if self.sigma1 < 0.0 || self.sigma2 < 0.0 {
            return bad("sigma1", "radii must be >= 0".into());
        }
        if !(self.b > 0.5 && self.b < 1.0) {
            return bad("b", format!("{} must lie in (1/2, 1)", self.b));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return bad("beta", format!("{} must lie in (0, 1/2)", self.beta));
        }
        if self.eps < 0.0 {
            return bad("eps", format!("{} must be >= 0", self.eps));
        }
        Ok(())
    }

    /// Checks the hypotheses of the KP-II bilinear estimate for
    /// `(s1, s2, b, beta, eps)`, naming the first violated constraint.
    pub fn check_bilinear_admissible(&self) -> Result<()> {
        self.validate().map_err(|e| Error::Inadmissible(e.to_string()))?;
        let fail = |m: String| Err(Error::Inadmissible(m));
        if self.s1 <= -1.25 {
            return fail(format!("s1 > -5/4 violated (s1 = {})", self.s1));
        }
        if self.s2 < 0.0 {
            return fail(format!("s2 >= 0 violated (s2 = {})", self.s2));
        }
        let s = (-self.s1).max(0.0);
        let eps_max = (0.4 * (1.25 - s)).min(0.15);
        if self.eps > eps_max {
            return fail(format!(
                "0 <= eps <= min{{2/5 (5/4 - s), 3/20}} = {eps_max} violated (eps = {})",
                self.eps
            ));
        }
        let beta_min = 0.45_f64.max(0.5 - 0.5 * (1.25 - s) + self.eps);
        if self.beta < beta_min || self.beta >= 0.5 {
            return fail(format!(
                "max{{9/20, 1/2 - (5/4 - s)/2 + eps}} = {beta_min} <= beta < 1/2 violated (beta = {})",
                self.beta
            ));
        }
        Ok(())
    }
}

/// `<x> = (1 + x^2)^(1/2)`.
#[inline]
pub fn japanese(x: f64) -> f64 {
    x.hypot(1.0)
}

/// Dispersion symbol `m(xi, eta) = xi^5 - eta^2 / xi`, zero on the `xi = 0` fiber.
#[inline]
pub fn dispersion(xi: f64, eta: f64) -> f64 {
    if xi == 0.0 {
        0.0
    } else {
        xi.powi(5) - eta * eta / xi
    }
}

/// `|d m / d xi| = |5 xi^4 + eta^2 / xi^2|`.
#[inline]
pub fn group_velocity_x(xi: f64, eta: f64) -> f64 {
    if xi == 0.0 {
        0.0
    } else {
        5.0 * xi.powi(4) + eta * eta / (xi * xi)
    }
}

/// Lattice evaluation of the dispersion symbol.
#[derive(Debug, Clone, Copy)]
pub struct DispersionSymbol {
    grid: Grid2D,
}

impl DispersionSymbol {
    pub fn new(grid: Grid2D) -> Self {
        Self { grid }
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> f64 {
        dispersion(self.grid.xi(j), self.grid.eta(k))
    }

    /// Largest `|dm/dxi|` over modes that survive dealiasing with `xi != 0`.
    pub fn max_group_velocity(&self) -> f64 {
        let g = self.grid;
        let mut best = 0.0_f64;
        for j in 0..g.nx {
            for k in 0..g.ny {
                if g.kx(j) != 0 && g.is_dealiased(j, k) && !g.is_nyquist(j, k) {
                    best = best.max(group_velocity_x(g.xi(j), g.eta(k)));
                }
            }
        }
        best
    }

    /// Largest `|m|` over dealiased modes.
    pub fn max_abs(&self) -> f64 {
        let g = self.grid;
        let mut best = 0.0_f64;
        for j in 0..g.nx {
            for k in 0..g.ny {
                if g.is_dealiased(j, k) && !g.is_nyquist(j, k) {
                    best = best.max(self.at(j, k).abs());
                }
            }
        }
        best
    }

    /// `exp(i t m)` for every lattice mode.
    ///
    /// The phase is built from `|m|` and the sign separately so the table is
    /// exactly odd-symmetric and multipliers keep hermitian fields hermitian.
    pub fn phases(&self, t: f64) -> Vec<Complex64> {
        let g = self.grid;
        let mut out = vec![Complex64::new(1.0, 0.0); g.len()];
        par::for_each_row(&mut out, g.ny, |j, row| {
            for (k, p) in row.iter_mut().enumerate() {
                let m = self.at(j, k);
                let a = t * m.abs();
                let (s, c) = a.sin_cos();
                let im = if m > 0.0 {
                    s
                } else if m < 0.0 {
                    -s
                } else {
                    0.0
                };
                *p = Complex64::new(c, im);
            }
        });
        out
    }
}

/// Multiplies each coefficient by a precomputed unimodular table.
pub fn apply_phases(s: &SpectralField, phases: &[Complex64]) -> SpectralField {
    let ny = s.grid().ny;
    s.map_modes(true, true, |j, k, c| c * phases[j * ny + k])
}

/// `S(t)`: multiplication by `exp(i t m(xi, eta))`.
pub fn semigroup_apply(s: &SpectralField, t: f64) -> SpectralField {
    if t == 0.0 {
        return s.clone();
    }
    apply_phases(s, &DispersionSymbol::new(*s.grid()).phases(t))
}

/// `A^{sigma1, sigma2}`: multiplication by `exp(sigma1 |xi| + sigma2 |eta|)`.
pub fn apply_gevrey(s: &SpectralField, sigma1: f64, sigma2: f64) -> Result<SpectralField> {
    let g = *s.grid();
    g.check_gevrey(sigma1, sigma2)?;
    if sigma1 == 0.0 && sigma2 == 0.0 {
        return Ok(s.clone());
    }
    Ok(s.map_modes(true, true, |j, k, c| {
        c * (sigma1 * g.xi(j).abs() + sigma2 * g.eta(k).abs()).exp()
    }))
}

/// `(lx ly sum exp(2 w(j, k)) |c|^2)^(1/2)` for a log-weight `w`, evaluated
/// relative to the largest weighted term.
pub(crate) fn log_weighted_norm(s: &SpectralField, log_weight: impl Fn(usize, usize) -> f64 + Sync + Send) -> f64 {
    let g = *s.grid();
    let coeffs = s.coeffs();
    let term = |j: usize, k: usize, c: &Complex64| -> f64 {
        let a = c.norm();
        if a == 0.0 {
            f64::NEG_INFINITY
        } else {
            log_weight(j, k) + a.ln()
        }
    };
    let lmax = par::map_rows(coeffs, g.ny, |j, row| {
        row.iter()
            .enumerate()
            .map(|(k, c)| term(j, k, c))
            .fold(f64::NEG_INFINITY, f64::max)
    })
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    if lmax == f64::NEG_INFINITY {
        return 0.0;
    }
    let rel = par::sum_rows(coeffs, g.ny, |j, row| {
        row.iter()
            .enumerate()
            .map(|(k, c)| (2.0 * (term(j, k, c) - lmax)).exp())
            .sum()
    });
    lmax.exp() * (g.area() * rel).sqrt()
}

/// Anisotropic Gevrey norm `||u||_{G^{sigma1, sigma2}}`.
///
/// Normalized as `(lx ly sum e^{2 sigma1 |xi| + 2 sigma2 |eta|} |c|^2)^(1/2)`,
/// so `gevrey_norm(s, 0, 0)` is the L^2 norm of the physical field.
pub fn gevrey_norm(s: &SpectralField, sigma1: f64, sigma2: f64) -> Result<f64> {
    let g = *s.grid();
    g.check_gevrey(sigma1, sigma2)?;
    Ok(log_weighted_norm(s, |j, k| {
        sigma1 * g.xi(j).abs() + sigma2 * g.eta(k).abs()
    }))
}

/// Anisotropic Sobolev norm `||u||_{H^{s1, s2}}` with weights `<xi>^s1 <eta>^s2`.
pub fn sobolev_norm(s: &SpectralField, s1: f64, s2: f64) -> f64 {
    let g = *s.grid();
    log_weighted_norm(s, |j, k| {
        0.5 * (s1 * g.xi(j).mul_add(g.xi(j), 1.0).ln() + s2 * g.eta(k).mul_add(g.eta(k), 1.0).ln())
    })
}

/// `N(u) = d_x[(A u)^2 - A(u^2)]` with dealiased pseudo-spectral products.
pub fn remainder_n(s: &SpectralField, sigma1: f64, sigma2: f64) -> Result<SpectralField> {
    let f = s.dealias();
    let af = apply_gevrey(&f, sigma1, sigma2)?;
    let mut bracket = af.square()?;
    let a_f2 = apply_gevrey(&f.square()?, sigma1, sigma2)?;
    bracket.add_scaled(-1.0, &a_f2)?;
    Ok(bracket.x_derivative())
}

/// Ratio of `e^{s|xi-xi1|} e^{s|xi1|} - e^{s|xi|}` to
/// `s <xi-xi1> <xi1> <xi>^{-1} e^{s|xi-xi1|} e^{s|xi1|}`.
///
/// Computed as `-expm1(-s d) <xi> / (s <xi-xi1> <xi1>)` with
/// `d = |xi-xi1| + |xi1| - |xi| >= 0`, which never overflows.
pub fn exp_gap_ratio(xi: f64, xi1: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("{sigma} must be finite and > 0"),
        });
    }
    let a = xi - xi1;
    let gap = (a.abs() + xi1.abs() - xi.abs()).max(0.0);
    let lhs_scaled = -(-sigma * gap).exp_m1();
    Ok(lhs_scaled * japanese(xi) / (sigma * japanese(a) * japanese(xi1)))
}

/// Supremum of [`exp_gap_ratio`] over an `n x n` sampling of `[-half, half]^2`.
pub fn exp_gap_sup(sigma: f64, half_width: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least two samples per axis".into(),
        });
    }
    exp_gap_ratio(0.0, 0.0, sigma)?;
    let h = 2.0 * half_width / (n - 1) as f64;
    let rows = par::map_indexed(n, |i| {
        let xi = -half_width + h * i as f64;
        (0..n)
            .map(|l| exp_gap_ratio(xi, -half_width + h * l as f64, sigma).unwrap_or(0.0))
            .fold(0.0_f64, f64::max)
    });
    Ok(rows.into_iter().fold(0.0_f64, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PhysicalField;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::square(16, 4.0 * PI).unwrap()
    }

    fn field(g: Grid2D) -> SpectralField {
        PhysicalField::from_fn(g, |x, y| {
            ((x - 6.0).powi(2) / 4.0 + (y - 6.0).powi(2) / 9.0)
                .mul_add(-1.0, 0.0)
                .exp()
        })
        .unwrap()
        .forward()
        .project_zero_x_mean()
        .dealias()
    }

    #[test]
    fn gevrey_zero_is_identity() {
        let s = field(grid());
        assert_eq!(apply_gevrey(&s, 0.0, 0.0).unwrap(), s);
    }

    #[test]
    fn gevrey_semigroup_in_sigma() {
        let s = field(grid());
        let two = apply_gevrey(&apply_gevrey(&s, 0.3, 0.0).unwrap(), 0.2, 0.0).unwrap();
        let one = apply_gevrey(&s, 0.5, 0.0).unwrap();
        let scale = one.max_abs_coeff();
        for (a, b) in two.coeffs().iter().zip(one.coeffs()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn gevrey_single_mode() {
        let g = grid();
        let s = SpectralField::from_modes(g, |kx, ky| {
            if kx == 1 && ky == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        })
        .unwrap();
        let a = apply_gevrey(&s, 0.5, 0.5).unwrap();
        let expected = (0.5 * (g.dxi() + g.deta())).exp();
        assert!((a.mode(1, 1).re - expected).abs() < 1e-15 * expected);
    }

    #[test]
    fn gevrey_norm_at_zero_is_l2() {
        let s = field(grid());
        let p = s.inverse().unwrap();
        let n = gevrey_norm(&s, 0.0, 0.0).unwrap();
        assert!((n - s.l2_norm()).abs() <= 1e-12 * n);
        assert!((n - p.l2_norm()).abs() <= 1e-12 * n);
    }

    #[test]
    fn gevrey_norm_single_mode_closed_form() {
        let g = grid();
        let c = Complex64::new(0.3, 0.4);
        let s =
            SpectralField::from_modes(g, |kx, ky| if kx == 2 && ky == -1 { c } else { Complex64::default() }).unwrap();
        let (xi, eta) = (2.0 * g.dxi(), g.deta());
        let expected = c.norm() * g.area().sqrt() * (0.7 * xi + 0.2 * eta).exp();
        let n = gevrey_norm(&s, 0.7, 0.2).unwrap();
        assert!((n - expected).abs() <= 1e-13 * expected);
    }

    #[test]
    fn gevrey_norm_survives_large_weights() {
        let g = Grid2D::square(64, 2.0 * PI).unwrap();
        let s = SpectralField::from_modes(g, |kx, _| Complex64::new(1e-3 / (1 + kx.abs()) as f64, 0.0)).unwrap();
        let sigma = g.max_sigma1(0.0);
        let n = gevrey_norm(&s, sigma, 0.0).unwrap();
        assert!(n.is_finite() && n > 1e200);
        assert!(gevrey_norm(&s, sigma * 1.01, 0.0).is_err());
    }

    #[test]
    fn sobolev_zero_is_l2_and_matches_direct_sum() {
        let g = grid();
        let s = field(g);
        assert!((sobolev_norm(&s, 0.0, 0.0) - s.l2_norm()).abs() <= 1e-12 * s.l2_norm());
        // independent summation oracle
        let mut acc = 0.0;
        for j in 0..g.nx {
            for k in 0..g.ny {
                acc += (1.0 + g.xi(j) * g.xi(j)) * s.at(j, k).norm_sqr();
            }
        }
        let direct = (g.area() * acc).sqrt();
        let n = sobolev_norm(&s, 1.0, 0.0);
        assert!((n - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn sobolev_dc_mode() {
        let g = grid();
        let s = PhysicalField::from_fn(g, |_, _| -2.0).unwrap().forward();
        let n = sobolev_norm(&s, 3.0, -1.5);
        assert!((n - 2.0 * g.area().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn semigroup_is_unitary_group() {
        let s = field(grid());
        assert_eq!(semigroup_apply(&s, 0.0), s);
        let a = semigroup_apply(&semigroup_apply(&s, 0.013), 0.029);
        let b = semigroup_apply(&s, 0.042);
        let scale = s.max_abs_coeff();
        for ((x, y), z) in a.coeffs().iter().zip(b.coeffs()).zip(s.coeffs()) {
            assert!((x - y).norm() <= 1e-12 * scale);
            assert!((x.norm() - z.norm()).abs() <= 1e-15 * scale);
        }
        assert!(a.is_hermitian() && a.is_zero_x_mean());
    }

    #[test]
    fn dispersion_vanishes_at_unit_mode() {
        // lx = ly = 2 pi puts (j, k) = (1, 1) at xi = eta = 1
        let g = Grid2D::square(8, 2.0 * PI).unwrap();
        assert_eq!(DispersionSymbol::new(g).at(1, 1), 0.0);
        let s = SpectralField::from_modes(g, |kx, ky| {
            if (kx, ky) == (1, 1) || (kx, ky) == (-1, -1) {
                Complex64::new(0.25, 0.0)
            } else {
                Complex64::default()
            }
        })
        .unwrap();
        assert_eq!(semigroup_apply(&s, 3.7).mode(1, 1), Complex64::new(0.25, 0.0));
    }

    #[test]
    fn dispersion_is_odd() {
        let g = grid();
        let d = DispersionSymbol::new(g);
        for j in 1..g.nx {
            for k in 0..g.ny {
                if g.is_nyquist(j, k) {
                    continue;
                }
                let (mj, mk) = g.mirror(j, k);
                assert_eq!(d.at(mj, mk), -d.at(j, k));
            }
        }
    }

    #[test]
    fn remainder_vanishes_at_zero_sigma() {
        let s = field(grid());
        assert_eq!(remainder_n(&s, 0.0, 0.0).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn remainder_has_zero_mean_and_is_real() {
        let s = field(grid());
        let n = remainder_n(&s, 0.4, 0.1).unwrap();
        assert!(n.is_zero_x_mean() && n.is_hermitian());
        assert_eq!(n.mode(0, 0), Complex64::default());
        assert!(n.max_abs_coeff() > 0.0);
    }

    #[test]
    fn exp_gap_ratio_zero_cases() {
        assert_eq!(exp_gap_ratio(3.0, 0.0, 0.5).unwrap(), 0.0);
        assert_eq!(exp_gap_ratio(3.0, 3.0, 0.5).unwrap(), 0.0);
        assert!(exp_gap_ratio(1.0, 2.0, 0.0).is_err());
        assert!(exp_gap_ratio(1.0, -2.0, 0.3).unwrap() > 0.0);
    }

    #[test]
    fn exp_gap_ratio_matches_direct_formula() {
        for &(xi, xi1, s) in &[(1.0, -2.0, 0.1), (5.0, 7.0, 1.0), (-3.0, 0.5, 0.01)] {
            let a: f64 = xi - xi1;
            let lhs = (s * a.abs()).exp() * (s * f64::abs(xi1)).exp() - (s * f64::abs(xi)).exp();
            let rhs = s * japanese(a) * japanese(xi1) / japanese(xi) * (s * a.abs()).exp() * (s * f64::abs(xi1)).exp();
            let r = exp_gap_ratio(xi, xi1, s).unwrap();
            assert!((r - lhs / rhs).abs() <= 1e-12 * (1.0 + r));
        }
    }

    #[test]
    fn bilinear_admissibility() {
        assert!(GevreyParams::default().check_bilinear_admissible().is_ok());
        let p = GevreyParams {
            s1: -1.3,
            ..Default::default()
        };
        assert!(p.check_bilinear_admissible().is_err());
        let p = GevreyParams {
            beta: 0.4,
            ..Default::default()
        };
        let msg = p.check_bilinear_admissible().unwrap_err().to_string();
        assert!(msg.contains("beta"), "{msg}");
        let p = GevreyParams {
            eps: 0.11,
            ..Default::default()
        };
        assert!(p.check_bilinear_admissible().unwrap_err().to_string().contains("eps"));
    }
}
