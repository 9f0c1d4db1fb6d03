//! Empirical ratio `||d_x(uv)||_{X^{s1,s2,-beta,eps}} / (||u||_{X^{s1,s2,b,eps}} ||v||_{X^{s1,s2,b,eps}})`
//! over random near-free waves.
//!
//! Each trial draws two real fields
//! `u(t) = sum_k c_k exp(i t (m_k + w_k)) e_k` with complex Gaussian `c_k`
//! shaped by `(1 + xi^2 + eta^2)^(-1)` on the dealiased modes with `xi != 0`
//! and detunings `w_k` uniform in `[-w_max, w_max]`. Streams come from
//! ChaCha8 seeded with `seed`, one stream per trial, so results do not depend
//! on scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::bourgain::{bourgain_norm_weighted, BourgainWeight, SpaceTimeField};
use crate::error::Result;
use crate::operators::{DispersionSymbol, GevreyParams};
use crate::spectral::{Grid2D, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearOptions {
    pub trials: usize,
    /// Lattice size per axis.
    pub n: usize,
    /// Period in both directions.
    pub length: f64,
    /// Tapered window length.
    pub window: f64,
    pub omega_max: f64,
    pub seed: u64,
    /// Use `v = u`, as in the Gevrey-weighted self-interaction bound.
    pub self_product: bool,
}

impl Default for BilinearOptions {
    fn default() -> Self {
        Self {
            trials: 200,
            n: 32,
            length: 16.0 * std::f64::consts::PI,
            window: 4.0,
            omega_max: 1.0,
            seed: 0,
            self_product: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearReport {
    pub n: usize,
    pub slices: usize,
    pub ratios: Vec<f64>,
    pub max: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearLadder {
    pub coarse: BilinearReport,
    pub fine: BilinearReport,
    /// `fine.max / coarse.max`.
    pub growth: f64,
}

/// Power-of-two slice count whose time grid resolves every detuning a
/// product of two waves can carry, with 20% headroom.
pub fn slice_count(grid: &Grid2D, window: f64, omega_max: f64) -> usize {
    let reach = 3.0 * DispersionSymbol::new(*grid).max_abs() + 2.0 * omega_max;
    let dt_max = std::f64::consts::PI / (1.2 * reach);
    ((window / dt_max).ceil() as usize).max(2).next_power_of_two()
}

struct Wave {
    coeffs: Vec<Complex64>,
    freq: Vec<f64>,
}

/// A wave advanced slice by slice through exact per-mode rotations.
///
/// Mirror modes carry conjugate states and conjugate rotations, so every
/// slice is exactly hermitian.
struct WaveClock {
    grid: Grid2D,
    state: Vec<Complex64>,
    step: Vec<Complex64>,
}

impl WaveClock {
    fn new(wave: &Wave, grid: Grid2D, dt: f64) -> Self {
        let step = wave
            .freq
            .iter()
            .map(|f| {
                let (s, c) = (f * dt).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        Self {
            grid,
            state: wave.coeffs.clone(),
            step,
        }
    }

    /// The current slice; advances the clock by one step.
    fn tick(&mut self) -> SpectralField {
        let out = SpectralField::from_parts_unchecked(self.grid, self.state.clone(), true, true);
        for (s, r) in self.state.iter_mut().zip(&self.step) {
            *s *= r;
        }
        out
    }
}

impl Wave {
    fn random(grid: &Grid2D, omega_max: f64, rng: &mut ChaCha8Rng) -> Self {
        let sym = DispersionSymbol::new(*grid);
        let mut coeffs = vec![Complex64::default(); grid.len()];
        let mut freq = vec![0.0; grid.len()];
        for j in 1..grid.nx / 2 {
            for k in 0..grid.ny {
                if !grid.is_dealiased(j, k) || grid.is_nyquist(j, k) {
                    continue;
                }
                let env = 1.0 / (1.0 + grid.xi(j).powi(2) + grid.eta(k).powi(2));
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let c = Complex64::new(re, im) * env;
                let w = omega_max * rng.random_range(-1.0..=1.0);
                let (mj, mk) = grid.mirror(j, k);
                coeffs[j * grid.ny + k] = c;
                coeffs[mj * grid.ny + mk] = c.conj();
                freq[j * grid.ny + k] = sym.at(j, k) + w;
                freq[mj * grid.ny + mk] = -(sym.at(j, k) + w);
            }
        }
        Self { coeffs, freq }
    }

    #[cfg(test)]
    fn at(&self, grid: Grid2D, t: f64) -> Result<SpectralField> {
        let c = self
            .coeffs
            .iter()
            .zip(&self.freq)
            .map(|(c, f)| {
                let (s, co) = (t * f).sin_cos();
                c * Complex64::new(co, s)
            })
            .collect();
        SpectralField::from_coeffs(grid, c)
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// One trial: the ratio for a fresh pair of random waves.
fn trial(grid: Grid2D, p: &GevreyParams, opts: &BilinearOptions, slices: usize, index: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64);
    let u = Wave::random(&grid, opts.omega_max, &mut rng);
    let v = if opts.self_product {
        None
    } else {
        Some(Wave::random(&grid, opts.omega_max, &mut rng))
    };
    let dt = opts.window / slices as f64;
    let count = if v.is_some() { 3 } else { 2 };
    let mut uc = WaveClock::new(&u, grid, dt);
    let mut vc = v.as_ref().map(|v| WaveClock::new(v, grid, dt));
    let windows = SpaceTimeField::build_many(grid, dt, slices, count, |_, _| {
        let us = uc.tick();
        let mut out = Vec::with_capacity(count);
        let prod = match vc.as_mut() {
            Some(vc) => {
                let vs = vc.tick();
                let prod = us.product(&vs)?.x_derivative();
                out.push(us);
                out.push(vs);
                prod
            }
            None => {
                let prod = us.square()?.x_derivative();
                out.push(us);
                prod
            }
        };
        out.push(prod);
        Ok(out)
    })?;
    let primal = BourgainWeight::primal(p);
    let dual = BourgainWeight::dual(p);
    let nu = bourgain_norm_weighted(&windows[0], &primal)?;
    let (nv, np) = if count == 3 {
        (bourgain_norm_weighted(&windows[1], &primal)?, &windows[2])
    } else {
        (nu, &windows[1])
    };
    let denom = nu * nv;
    Ok(if denom == 0.0 {
        0.0
    } else {
        bourgain_norm_weighted(np, &dual)? / denom
    })
}

/// Ratio statistics over `opts.trials` random pairs on an `n x n` lattice.
pub fn bilinear_ratio(p: &GevreyParams, opts: &BilinearOptions) -> Result<BilinearReport> {
    p.check_bilinear_admissible()?;
    let grid = Grid2D::square(opts.n, opts.length)?;
    grid.check_gevrey(p.sigma1, p.sigma2)?;
    let slices = slice_count(&grid, opts.window, opts.omega_max);
    let ratios = (0..opts.trials)
        .map(|i| trial(grid, p, opts, slices, i))
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let q = |x| if sorted.is_empty() { 0.0 } else { quantile(&sorted, x) };
    Ok(BilinearReport {
        n: opts.n,
        slices,
        max: sorted.last().copied().unwrap_or(0.0),
        p50: q(0.5),
        p90: q(0.9),
        p99: q(0.99),
        ratios,
    })
}

/// Runs [`bilinear_ratio`] at `n` and `2n` and reports the growth of the max.
pub fn bilinear_ladder(p: &GevreyParams, opts: &BilinearOptions) -> Result<BilinearLadder> {
    let coarse = bilinear_ratio(p, opts)?;
    let fine = bilinear_ratio(p, &BilinearOptions { n: 2 * opts.n, ..*opts })?;
    let growth = if coarse.max == 0.0 {
        f64::NAN
    } else {
        fine.max / coarse.max
    };
    Ok(BilinearLadder { coarse, fine, growth })
}
