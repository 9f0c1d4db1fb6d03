use std::ops::{Add, Sub};

use num_complex::Complex64;
use rustfft::FftDirection;

use super::fft::fft2;
use super::grid::Grid2D;
use crate::error::{Error, Result};
use crate::par;

/// Relative mass on the `xi = 0` fiber above which `x_antiderivative` refuses.
pub const XI_ZERO_MASS_TOLERANCE: f64 = 1e-13;

/// Real samples of `u(x, y)` on the collocation lattice `x_i = i*dx`, `y_k = k*dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` on the lattice. Non-finite samples are rejected.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Result<Self> {
        let mut values = vec![0.0; grid.len()];
        par::for_each_row(&mut values, grid.ny, |i, row| {
            let x = grid.x(i);
            for (k, v) in row.iter_mut().enumerate() {
                *v = f(x, grid.y(k));
            }
        });
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `(dx dy sum u^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        let cell = self.grid.dx() * self.grid.dy();
        (cell * par::sum_rows(&self.values, self.grid.ny, |_, r| r.iter().map(|v| v * v).sum())).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn forward(&self) -> SpectralField {
        forward_real(self)
    }
}

/// Fourier-series coefficients `c(j, k)` of a field on [`Grid2D`].
///
/// `u(x, y) = sum c(j, k) exp(i (xi_j x + eta_k y))`, so `a cos(xi_1 x)` has
/// coefficients of modulus `a/2` at `(+-1, 0)`. The flags are kept truthful:
/// `hermitian` means `c(-j, -k) == conj(c(j, k))` bit for bit, and
/// `zero_x_mean` means every `xi = 0` coefficient is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
    hermitian: bool,
    zero_x_mean: bool,
}

impl SpectralField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
            hermitian: true,
            zero_x_mean: true,
        }
    }

    /// Wraps raw coefficients, zeroing the Nyquist lines and detecting flags.
    pub fn from_coeffs(grid: Grid2D, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if let Some(index) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        zero_nyquist(&grid, &mut coeffs);
        let mut s = Self {
            grid,
            coeffs,
            hermitian: false,
            zero_x_mean: false,
        };
        s.recompute_flags();
        Ok(s)
    }

    /// Builds coefficients from signed wavenumbers `(kx, ky)`.
    pub fn from_modes(grid: Grid2D, f: impl Fn(i64, i64) -> Complex64 + Sync + Send) -> Result<Self> {
        let mut coeffs = vec![Complex64::default(); grid.len()];
        par::for_each_row(&mut coeffs, grid.ny, |j, row| {
            for (k, c) in row.iter_mut().enumerate() {
                if !grid.is_nyquist(j, k) {
                    *c = f(grid.kx(j), grid.ky(k));
                }
            }
        });
        Self::from_coeffs(grid, coeffs)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_zero_x_mean(&self) -> bool {
        self.zero_x_mean
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> Complex64 {
        self.coeffs[j * self.grid.ny + k]
    }

    /// Coefficient at signed wavenumbers.
    pub fn mode(&self, kx: i64, ky: i64) -> Complex64 {
        self.at(Grid2D::index_of(kx, self.grid.nx), Grid2D::index_of(ky, self.grid.ny))
    }

    /// Re-derives both flags from the coefficients.
    ///
    /// Hermitian symmetry is accepted within 4 ulp of the largest modulus, so
    /// fields written by other tools still qualify; the field is then
    /// symmetrized so the flag holds exactly.
    pub fn recompute_flags(&mut self) {
        let g = self.grid;
        self.zero_x_mean = self.coeffs[..g.ny].iter().all(|c| c.re == 0.0 && c.im == 0.0);
        let scale = self.max_abs_coeff();
        let tol = 4.0 * f64::EPSILON * scale;
        let herm = self.coeffs.iter().enumerate().all(|(idx, c)| {
            let (j, k) = (idx / g.ny, idx % g.ny);
            let (mj, mk) = g.mirror(j, k);
            (self.coeffs[mj * g.ny + mk].conj() - c).norm() <= tol
        });
        self.hermitian = herm;
        if herm {
            self.coeffs = symmetrized(&g, &self.coeffs);
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// Applies a mode-wise map `f(j, k, c)`; the caller states which flags survive.
    pub(crate) fn map_modes(
        &self,
        keeps_hermitian: bool,
        keeps_zero_x_mean: bool,
        f: impl Fn(usize, usize, Complex64) -> Complex64 + Sync + Send,
    ) -> Self {
        let g = self.grid;
        let mut coeffs = self.coeffs.clone();
        par::for_each_row(&mut coeffs, g.ny, |j, row| {
            for (k, c) in row.iter_mut().enumerate() {
                if !g.is_nyquist(j, k) {
                    *c = f(j, k, *c);
                }
            }
        });
        Self {
            grid: g,
            coeffs,
            hermitian: self.hermitian && keeps_hermitian,
            zero_x_mean: self.zero_x_mean && keeps_zero_x_mean,
        }
    }

    /// `(lx ly sum |c|^2)^(1/2)`, equal to the physical L^2 norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.area() * self.sum_abs2(|_, _| true)).sqrt()
    }

    /// Squared L^2 mass carried by the `xi = 0` fiber.
    pub fn x_mean_mass(&self) -> f64 {
        self.grid.area() * self.coeffs[..self.grid.ny].iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub(crate) fn sum_abs2(&self, keep: impl Fn(usize, usize) -> bool + Sync + Send) -> f64 {
        let ny = self.grid.ny;
        par::sum_rows(&self.coeffs, ny, |j, row| {
            row.iter()
                .enumerate()
                .filter(|(k, _)| keep(j, *k))
                .map(|(_, c)| c.norm_sqr())
                .sum()
        })
    }

    /// Real collocation values. Requires the hermitian flag.
    pub fn inverse(&self) -> Result<PhysicalField> {
        inverse_transform(self)
    }

    /// Multiplication by `i xi`.
    pub fn x_derivative(&self) -> Self {
        let g = self.grid;
        let mut out = self.map_modes(true, true, |j, _, c| {
            if g.kx(j) == 0 {
                Complex64::default()
            } else {
                Complex64::new(0.0, g.xi(j)) * c
            }
        });
        out.zero_x_mean = true;
        out
    }

    /// Division by `i xi` on `xi != 0`; the `xi = 0` fiber stays zero.
    pub fn x_antiderivative(&self) -> Result<Self> {
        if !self.zero_x_mean {
            let total = self.sum_abs2(|_, _| true);
            let fiber = self.coeffs[..self.grid.ny].iter().map(|c| c.norm_sqr()).sum::<f64>();
            let ratio = if total > 0.0 { fiber / total } else { 0.0 };
            if ratio > XI_ZERO_MASS_TOLERANCE {
                return Err(Error::IllPosedInversion { ratio });
            }
        }
        let g = self.grid;
        let mut out = self.map_modes(true, true, |j, _, c| {
            if g.kx(j) == 0 {
                Complex64::default()
            } else {
                // c / (i xi) = -i c / xi
                Complex64::new(c.im, -c.re) / g.xi(j)
            }
        });
        out.zero_x_mean = true;
        Ok(out)
    }

    /// 2/3-rule truncation.
    pub fn dealias(&self) -> Self {
        let g = self.grid;
        self.map_modes(
            true,
            true,
            |j, k, c| {
                if g.is_dealiased(j, k) {
                    c
                } else {
                    Complex64::default()
                }
            },
        )
    }

    pub fn project_zero_x_mean(&self) -> Self {
        let g = self.grid;
        let mut out = self.map_modes(
            true,
            true,
            |j, _, c| {
                if g.kx(j) == 0 {
                    Complex64::default()
                } else {
                    c
                }
            },
        );
        out.zero_x_mean = true;
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map_modes(true, true, |_, _, c| c * a)
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        let ny = self.grid.ny;
        par::for_each_row(&mut self.coeffs, ny, |j, row| {
            let src = &other.coeffs[j * ny..(j + 1) * ny];
            for (c, o) in row.iter_mut().zip(src) {
                *c += o * a;
            }
        });
        self.hermitian &= other.hermitian;
        self.zero_x_mean &= other.zero_x_mean;
        Ok(())
    }

    /// Dealiased pseudo-spectral product `P(u v)` of two real fields.
    ///
    /// Both fields are synthesized by one complex transform of `u + i v`.
    pub fn product(&self, other: &SpectralField) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        if !(self.hermitian && other.hermitian) {
            return Err(Error::SymmetryViolation);
        }
        let g = self.grid;
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + i * b).collect();
        fft2(&mut buf, g.nx, g.ny, FftDirection::Inverse);
        let w = buf.iter().map(|c| c.re * c.im).collect();
        Ok(PhysicalField::new(g, w)?.forward().dealias())
    }

    /// Dealiased square `P(u^2)`.
    pub fn square(&self) -> Result<Self> {
        let mut w = self.inverse()?.into_values();
        for a in w.iter_mut() {
            *a *= *a;
        }
        Ok(PhysicalField::new(self.grid, w)?.forward().dealias())
    }

    /// Wraps coefficients whose flags the caller already knows.
    pub(crate) fn from_parts_unchecked(
        grid: Grid2D,
        coeffs: Vec<Complex64>,
        hermitian: bool,
        zero_x_mean: bool,
    ) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self {
            grid,
            coeffs,
            hermitian,
            zero_x_mean,
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs).expect("grid mismatch in field addition");
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs).expect("grid mismatch in field subtraction");
        out
    }
}

fn zero_nyquist(g: &Grid2D, coeffs: &mut [Complex64]) {
    for k in 0..g.ny {
        coeffs[(g.nx / 2) * g.ny + k] = Complex64::default();
    }
    for j in 0..g.nx {
        coeffs[j * g.ny + g.ny / 2] = Complex64::default();
    }
}

/// Exactly hermitian projection `(c + conj(c_mirror)) / 2`.
fn symmetrized(g: &Grid2D, coeffs: &[Complex64]) -> Vec<Complex64> {
    let g = *g;
    let mut out = vec![Complex64::default(); coeffs.len()];
    par::for_each_row(&mut out, g.ny, |j, row| {
        for (k, c) in row.iter_mut().enumerate() {
            if g.is_nyquist(j, k) {
                continue;
            }
            let (mj, mk) = g.mirror(j, k);
            *c = (coeffs[j * g.ny + k] + coeffs[mj * g.ny + mk].conj()) * 0.5;
        }
    });
    out
}

fn forward_real(p: &PhysicalField) -> SpectralField {
    let g = p.grid;
    let mut buf: Vec<Complex64> = p.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, g.nx, g.ny, FftDirection::Forward);
    let norm = 1.0 / g.len() as f64;
    for c in buf.iter_mut() {
        *c *= norm;
    }
    zero_nyquist(&g, &mut buf);
    let coeffs = symmetrized(&g, &buf);
    let zero_x_mean = coeffs[..g.ny].iter().all(|c| c.re == 0.0 && c.im == 0.0);
    SpectralField {
        grid: g,
        coeffs,
        hermitian: true,
        zero_x_mean,
    }
}

/// Physical samples to Fourier coefficients; the result is exactly hermitian.
pub fn forward_transform(p: &PhysicalField) -> Result<SpectralField> {
    if let Some(index) = p.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(forward_real(p))
}

/// Fourier coefficients to real samples. Non-hermitian input is rejected.
pub fn inverse_transform(s: &SpectralField) -> Result<PhysicalField> {
    if !s.hermitian {
        return Err(Error::SymmetryViolation);
    }
    let g = s.grid;
    let mut buf = s.coeffs.clone();
    fft2(&mut buf, g.nx, g.ny, FftDirection::Inverse);
    let values: Vec<f64> = buf.iter().map(|c| c.re).collect();
    PhysicalField::new(g, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(16, 12, 2.0 * PI, 3.0).unwrap()
    }

    fn sample(g: Grid2D) -> SpectralField {
        PhysicalField::from_fn(g, |x, y| (x).sin() + 0.3 * (2.0 * x + 2.0 * PI * y / 3.0).cos() + 0.2)
            .unwrap()
            .forward()
    }

    #[test]
    fn constant_maps_to_dc() {
        let g = grid();
        let s = PhysicalField::from_fn(g, |_, _| 1.0).unwrap().forward();
        for j in 0..g.nx {
            for k in 0..g.ny {
                let expected = if j == 0 && k == 0 { 1.0 } else { 0.0 };
                assert!((s.at(j, k) - Complex64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
        assert!(s.is_hermitian());
        assert!(!s.is_zero_x_mean());
    }

    #[test]
    fn cosine_has_half_modulus() {
        let g = grid();
        let s = PhysicalField::from_fn(g, |x, _| (2.0 * PI * x / g.lx).cos())
            .unwrap()
            .forward();
        assert!((s.mode(1, 0).norm() - 0.5).abs() < 1e-15);
        assert!((s.mode(-1, 0).norm() - 0.5).abs() < 1e-15);
        assert!(s.mode(2, 0).norm() < 1e-15);
    }

    #[test]
    fn half_modulus_modes_invert_to_cosine() {
        let g = grid();
        let s = SpectralField::from_modes(g, |kx, ky| {
            if kx.abs() == 1 && ky == 0 {
                Complex64::new(0.5, 0.0)
            } else {
                Complex64::default()
            }
        })
        .unwrap();
        let p = s.inverse().unwrap();
        for i in 0..g.nx {
            for k in 0..g.ny {
                let expected = (2.0 * PI * g.x(i) / g.lx).cos();
                assert!((p.values()[i * g.ny + k] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_coefficients_give_zero_field() {
        let p = SpectralField::zeros(grid()).inverse().unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_rejects_non_finite() {
        let g = grid();
        let mut v = vec![0.0; g.len()];
        v[5] = f64::NAN;
        assert!(matches!(PhysicalField::new(g, v), Err(Error::NonFinite { index: 5 })));
    }

    #[test]
    fn inverse_rejects_non_hermitian() {
        let g = grid();
        let s = SpectralField::from_modes(g, |kx, ky| {
            if kx == 1 && ky == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        })
        .unwrap();
        assert!(!s.is_hermitian());
        assert!(matches!(s.inverse(), Err(Error::SymmetryViolation)));
    }

    #[test]
    fn derivative_of_plane_wave() {
        let g = grid();
        let s = SpectralField::from_modes(g, |kx, ky| {
            if kx == 1 && ky == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        })
        .unwrap();
        let d = s.x_derivative();
        assert_eq!(d.mode(1, 0), Complex64::new(0.0, 2.0 * PI / g.lx));
        assert!(d.is_zero_x_mean());
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = grid();
        let s = PhysicalField::from_fn(g, |_, _| 3.0).unwrap().forward();
        assert_eq!(s.x_derivative().max_abs_coeff(), 0.0);
    }

    #[test]
    fn fifth_derivative_is_fifth_power() {
        let g = grid();
        let s = sample(g);
        let mut d = s.clone();
        for _ in 0..5 {
            d = d.x_derivative();
        }
        for j in 0..g.nx {
            for k in 0..g.ny {
                let sym = Complex64::new(0.0, g.xi(j)).powi(5);
                let expected = if g.is_nyquist(j, k) {
                    Complex64::default()
                } else {
                    sym * s.at(j, k)
                };
                assert!((d.at(j, k) - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
            }
        }
    }

    #[test]
    fn antiderivative_of_mode() {
        let g = grid();
        let c = Complex64::new(0.3, -0.7);
        let s = SpectralField::from_modes(g, |kx, ky| {
            if kx == 1 && ky == 0 {
                c
            } else if kx == -1 && ky == 0 {
                c.conj()
            } else {
                Complex64::default()
            }
        })
        .unwrap();
        let a = s.x_antiderivative().unwrap();
        let expected = c / Complex64::new(0.0, 2.0 * PI / g.lx);
        assert!((a.mode(1, 0) - expected).norm() < 1e-15);
        assert!(a.is_hermitian());
    }

    #[test]
    fn antiderivative_rejects_mean_mass() {
        let g = grid();
        let s = sample(g);
        assert!(matches!(s.x_antiderivative(), Err(Error::IllPosedInversion { .. })));
    }

    #[test]
    fn dealias_band_and_idempotence() {
        let g = Grid2D::square(12, 2.0 * PI).unwrap();
        let s = SpectralField::from_modes(g, |kx, ky| Complex64::new(1.0 + kx as f64, ky as f64)).unwrap();
        let d = s.dealias();
        assert_eq!(d.mode(4, 4), s.mode(4, 4));
        assert_eq!(d.mode(5, 0), Complex64::default());
        assert_eq!(d.mode(0, -5), Complex64::default());
        assert_eq!(d.dealias(), d);
        let inside = s.dealias();
        assert_eq!(inside.dealias(), inside);
    }

    #[test]
    fn projection_removes_fiber_mass() {
        let g = grid();
        let s = sample(g);
        let before = s.l2_norm().powi(2);
        let removed = s.x_mean_mass();
        let p = s.project_zero_x_mean();
        assert!(p.is_zero_x_mean());
        assert!(((before - p.l2_norm().powi(2)) - removed).abs() <= 1e-12 * before);
        assert_eq!(p.project_zero_x_mean(), p);
        let c = PhysicalField::from_fn(g, |_, _| 2.0).unwrap().forward();
        assert_eq!(c.project_zero_x_mean().max_abs_coeff(), 0.0);
    }

    #[test]
    fn derivative_commutes_with_dealias() {
        let g = grid();
        let s = sample(g).project_zero_x_mean();
        assert_eq!(s.x_derivative().dealias(), s.dealias().x_derivative());
        assert_eq!(
            s.x_antiderivative().unwrap().dealias(),
            s.dealias().x_antiderivative().unwrap()
        );
    }
}
