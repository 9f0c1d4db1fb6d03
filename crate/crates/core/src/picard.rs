//! Discrete Duhamel operator and Picard iteration on a short time window.
//!
//! A window holds `M + 1` equally spaced slices on `[0, delta]`. One Picard
//! step maps a window `w` to
//! `t -> S(t) [f - 1/2 int_0^t S(-t') d_x P(w(t')^2) dt']`, with the integral
//! accumulated by composite Simpson quadrature (a 3/8 panel closes odd
//! nodes). Iteration stops when the sup over slices of the Gevrey distance
//! between successive iterates falls below the tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{cfl_dt, Stepper};
use crate::operators::{gevrey_norm, semigroup_apply};
use crate::par;
use crate::spectral::{Grid2D, SpectralField};

/// `delta = c0 (1 + ||f||)^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaRule {
    pub c0: f64,
    /// Must exceed 1.
    pub exponent: f64,
}

impl DeltaRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0.is_finite() && self.c0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "c0",
                reason: format!("{} must be > 0", self.c0),
            });
        }
        if !(self.exponent.is_finite() && self.exponent > 1.0) {
            return Err(Error::InvalidParameter {
                name: "exponent",
                reason: format!("{} must be > 1", self.exponent),
            });
        }
        Ok(())
    }
}

/// Window length for data of norm `f_norm`.
pub fn delta_rule(f_norm: f64, rule: DeltaRule) -> f64 {
    rule.c0 * (1.0 + f_norm).powf(-rule.exponent)
}

/// Slices `u(t_j)` at `t_j = j delta / M`, `j = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeWindowField {
    grid: Grid2D,
    delta: f64,
    slices: Vec<SpectralField>,
}

impl TimeWindowField {
    pub fn new(delta: f64, slices: Vec<SpectralField>) -> Result<Self> {
        let Some(first) = slices.first() else {
            return Err(Error::InvalidParameter {
                name: "slices",
                reason: "window needs at least one slice".into(),
            });
        };
        let grid = *first.grid();
        for s in &slices {
            grid.ensure_same(s.grid())?;
        }
        if !(delta.is_finite() && delta >= 0.0) || (slices.len() > 1 && delta == 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("{delta} must be > 0"),
            });
        }
        Ok(Self { grid, delta, slices })
    }

    /// Free evolution `S(t_j) f` on `M + 1` nodes.
    pub fn free(f: &SpectralField, delta: f64, m: usize) -> Result<Self> {
        let h = delta / m.max(1) as f64;
        let slices = par::map_indexed(m + 1, |j| semigroup_apply(f, h * j as f64));
        Self::new(delta, slices)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        if self.intervals() == 0 {
            0.0
        } else {
            self.delta / self.intervals() as f64
        }
    }

    pub fn time(&self, j: usize) -> f64 {
        if j == self.intervals() {
            self.delta
        } else {
            self.spacing() * j as f64
        }
    }

    pub fn slices(&self) -> &[SpectralField] {
        &self.slices
    }

    pub fn last(&self) -> &SpectralField {
        self.slices.last().expect("window is never empty")
    }

    /// `sup_j ||u(t_j)||_{G^{sigma1, sigma2}}`.
    pub fn sup_norm(&self, sigma1: f64, sigma2: f64) -> Result<f64> {
        let norms = par::map_indexed(self.slices.len(), |j| gevrey_norm(&self.slices[j], sigma1, sigma2));
        norms.into_iter().try_fold(0.0_f64, |acc, n| Ok(acc.max(n?)))
    }

    /// `sup_j ||u(t_j) - v(t_j)||_{G^{sigma1, sigma2}}`.
    pub fn sup_distance(&self, other: &Self, sigma1: f64, sigma2: f64) -> Result<f64> {
        if self.slices.len() != other.slices.len() {
            return Err(Error::InvalidParameter {
                name: "window",
                reason: format!("slice counts differ: {} vs {}", self.slices.len(), other.slices.len()),
            });
        }
        self.grid.ensure_same(&other.grid)?;
        let d = par::map_indexed(self.slices.len(), |j| {
            gevrey_norm(&(&self.slices[j] - &other.slices[j]), sigma1, sigma2)
        });
        d.into_iter().try_fold(0.0_f64, |acc, n| Ok(acc.max(n?)))
    }
}

/// Running integrals `I_j = int_0^{t_j} g` on a uniform grid of spacing `h`.
fn cumulative_integral(g: &[SpectralField], h: f64) -> Result<Vec<SpectralField>> {
    let m = g.len() - 1;
    let mut out: Vec<SpectralField> = Vec::with_capacity(m + 1);
    let combo = |base: Option<&SpectralField>, terms: &[(f64, usize)]| -> Result<SpectralField> {
        let mut acc = match base {
            Some(b) => b.clone(),
            None => g[0].scaled(0.0),
        };
        for &(w, i) in terms {
            acc.add_scaled(w * h, &g[i])?;
        }
        Ok(acc)
    };
    out.push(g[0].scaled(0.0));
    for j in 1..=m {
        let next = if j == 1 {
            if m >= 3 {
                combo(
                    None,
                    &[(9.0 / 24.0, 0), (19.0 / 24.0, 1), (-5.0 / 24.0, 2), (1.0 / 24.0, 3)],
                )?
            } else {
                combo(None, &[(5.0 / 12.0, 0), (8.0 / 12.0, 1), (-1.0 / 12.0, 2)])?
            }
        } else if j % 2 == 0 {
            combo(
                Some(&out[j - 2]),
                &[(1.0 / 3.0, j - 2), (4.0 / 3.0, j - 1), (1.0 / 3.0, j)],
            )?
        } else {
            combo(
                Some(&out[j - 3]),
                &[
                    (3.0 / 8.0, j - 3),
                    (9.0 / 8.0, j - 2),
                    (9.0 / 8.0, j - 1),
                    (3.0 / 8.0, j),
                ],
            )?
        };
        out.push(next);
    }
    Ok(out)
}

/// One application of the Duhamel map to window `w` with data `f`.
///
/// `nonlinear = false` drops the integral term, returning free evolution.
pub fn duhamel_apply_with(f: &SpectralField, w: &TimeWindowField, nonlinear: bool) -> Result<TimeWindowField> {
    let m = w.intervals();
    if m % 2 == 1 || m == 0 {
        return Err(Error::OddWindow(m));
    }
    f.grid().ensure_same(w.grid())?;
    if !nonlinear {
        return TimeWindowField::free(f, w.delta, m);
    }
    let h = w.spacing();
    let rotated = par::map_indexed(m + 1, |j| -> Result<SpectralField> {
        let sq = w.slices[j].square()?;
        Ok(semigroup_apply(&sq.x_derivative(), -w.time(j)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let integrals = cumulative_integral(&rotated, h)?;
    let slices = par::map_indexed(m + 1, |j| -> Result<SpectralField> {
        let mut inner = f.clone();
        inner.add_scaled(-0.5, &integrals[j])?;
        Ok(semigroup_apply(&inner, w.time(j)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    TimeWindowField::new(w.delta, slices)
}

/// `t -> S(t) f - 1/2 int_0^t S(t - t') d_x (w(t')^2) dt'` on the nodes of `w`.
pub fn duhamel_apply(f: &SpectralField, w: &TimeWindowField) -> Result<TimeWindowField> {
    duhamel_apply_with(f, w, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Window intervals `M` (even).
    pub m: usize,
    pub n_max: usize,
    pub tol: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub nonlinear: bool,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            m: 64,
            n_max: 60,
            tol: 1e-9,
            sigma1: 0.5,
            sigma2: 0.0,
            nonlinear: true,
        }
    }
}

/// Per-iterate record: `d_n = sup dist(u_n, u_{n-1})`, `r_n = d_n / d_{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardStep {
    pub n: usize,
    pub distance: f64,
    pub ratio: Option<f64>,
    pub sup_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub window: TimeWindowField,
    pub steps: Vec<PicardStep>,
    pub converged: bool,
}

impl PicardOutcome {
    pub fn ratios(&self) -> Vec<f64> {
        self.steps.iter().filter_map(|s| s.ratio).collect()
    }

    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

/// Iterates the Duhamel map from free evolution.
///
/// Three consecutive non-decreasing distances abort with
/// [`Error::Diverged`]; exhausting `n_max` returns with `converged = false`.
pub fn picard_iterate(f: &SpectralField, delta: f64, opts: &PicardOptions) -> Result<PicardOutcome> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("{delta} must be > 0"),
        });
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("{} must be > 0", opts.tol),
        });
    }
    if opts.m % 2 == 1 || opts.m == 0 {
        return Err(Error::OddWindow(opts.m));
    }
    f.grid().check_gevrey(opts.sigma1, opts.sigma2)?;
    let f = f.dealias();
    let mut current = TimeWindowField::free(&f, delta, opts.m)?;
    let mut steps: Vec<PicardStep> = Vec::new();
    for n in 1..=opts.n_max {
        let next = duhamel_apply_with(&f, &current, opts.nonlinear)?;
        let distance = next.sup_distance(&current, opts.sigma1, opts.sigma2)?;
        let sup_norm = next.sup_norm(opts.sigma1, opts.sigma2)?;
        if !distance.is_finite() || !sup_norm.is_finite() {
            return Err(Error::Diverged { iterations: n });
        }
        let ratio = steps.last().map(|p| distance / p.distance);
        steps.push(PicardStep {
            n,
            distance,
            ratio,
            sup_norm,
        });
        current = next;
        if distance < opts.tol {
            return Ok(PicardOutcome {
                window: current,
                steps,
                converged: true,
            });
        }
        if let [.., a, b, c] = steps.as_slice() {
            if b.distance >= a.distance && c.distance >= b.distance {
                return Err(Error::Diverged { iterations: n });
            }
        }
    }
    Ok(PicardOutcome {
        window: current,
        steps,
        converged: false,
    })
}

/// Result of comparing a window's sup norm against twice the data norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingCheck {
    pub passed: bool,
    /// `sup_t ||u(t)|| / ||f||`; zero for zero data.
    pub ratio: f64,
}

pub fn doubling_check(f: &SpectralField, window: &TimeWindowField, sigma1: f64, sigma2: f64) -> Result<DoublingCheck> {
    let base = gevrey_norm(f, sigma1, sigma2)?;
    let sup = window.sup_norm(sigma1, sigma2)?;
    if base == 0.0 {
        return Ok(DoublingCheck {
            passed: sup == 0.0,
            ratio: 0.0,
        });
    }
    let ratio = sup / base;
    Ok(DoublingCheck {
        passed: ratio <= 2.0,
        ratio,
    })
}

/// Integrator slices at the nodes of an `m`-interval window on `[0, delta]`,
/// stepping no coarser than the CFL limit. The cross-method reference for
/// Picard windows.
pub fn integrator_window(f: &SpectralField, delta: f64, m: usize) -> Result<TimeWindowField> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "window needs at least one interval".into(),
        });
    }
    let node = delta / m as f64;
    let sub = (node / cfl_dt(f.grid(), 1.0)).ceil().max(1.0) as usize;
    let mut st = Stepper::new(f.clone(), node / sub as f64)?;
    let mut slices = vec![f.clone()];
    for _ in 0..m {
        st.run(sub)?;
        slices.push(st.field().clone());
    }
    TimeWindowField::new(delta, slices)
}

/// Largest doubling ratio the calibration accepts (a 10% margin below 2).
pub const CALIBRATION_MAX_RATIO: f64 = 1.8;

/// Largest sup-distance between a converged window and the integrator,
/// relative to the data norm, that the calibration accepts, in units of the
/// Picard tolerance. Past this the window quadrature, not the iteration,
/// limits accuracy, and the doubling ratio of the discrete fixed point stops
/// saying anything about the flow.
pub const CALIBRATION_RESOLUTION: f64 = 10.0;

/// Geometric ladder of `c0` values the shipped calibration searches.
pub const CALIBRATION_CANDIDATES: [f64; 8] = [0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c0: f64,
    /// Doubling ratio of each suite member at the chosen `c0`.
    pub ratios: Vec<f64>,
    /// Largest contraction ratio seen at the chosen `c0`.
    pub max_contraction: f64,
    /// Largest relative window-vs-integrator distance at the chosen `c0`.
    pub max_resolution: f64,
}

/// Picks the largest `c0` from `candidates` for which every suite member's
/// Picard iteration converges with doubling ratio at most
/// [`CALIBRATION_MAX_RATIO`] and resolves the flow to
/// [`CALIBRATION_RESOLUTION`] times the tolerance.
pub fn calibrate_c0(
    suite: &[SpectralField],
    candidates: &[f64],
    exponent: f64,
    opts: &PicardOptions,
) -> Result<Calibration> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    'candidate: for &c0 in &sorted {
        let rule = DeltaRule { c0, exponent };
        rule.validate()?;
        let mut ratios = Vec::with_capacity(suite.len());
        let mut max_contraction = 0.0_f64;
        let mut max_resolution = 0.0_f64;
        for f in suite {
            let norm = gevrey_norm(f, opts.sigma1, opts.sigma2)?;
            let delta = delta_rule(norm, rule);
            let out = match picard_iterate(f, delta, opts) {
                Ok(o) if o.converged => o,
                Ok(_) | Err(Error::Diverged { .. }) => continue 'candidate,
                Err(e) => return Err(e),
            };
            let check = doubling_check(f, &out.window, opts.sigma1, opts.sigma2)?;
            if check.ratio > CALIBRATION_MAX_RATIO {
                continue 'candidate;
            }
            if opts.nonlinear && norm > 0.0 {
                let reference = integrator_window(f, delta, out.window.intervals())?;
                let rel = reference.sup_distance(&out.window, opts.sigma1, opts.sigma2)? / norm;
                if rel.is_nan() || rel > CALIBRATION_RESOLUTION * opts.tol {
                    continue 'candidate;
                }
                max_resolution = max_resolution.max(rel);
            }
            ratios.push(check.ratio);
            max_contraction = out.ratios().into_iter().fold(max_contraction, f64::max);
        }
        return Ok(Calibration {
            c0,
            ratios,
            max_contraction,
            max_resolution,
        });
    }
    Err(Error::InvalidParameter {
        name: "c0",
        reason: "no candidate passed the doubling check on every suite member".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialData;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::square(32, 16.0 * PI).unwrap()
    }

    fn gaussian(a: f64) -> SpectralField {
        InitialData::Gaussian {
            amplitude: a,
            width: 4.0,
        }
        .build(&grid())
        .unwrap()
    }

    #[test]
    fn delta_rule_examples() {
        let r = DeltaRule { c0: 0.1, exponent: 2.0 };
        assert_eq!(delta_rule(0.0, r), 0.1);
        assert!((delta_rule(1.0, r) - 0.025).abs() < 1e-15);
        assert!(delta_rule(2.0, r) < delta_rule(1.0, r));
        assert!(DeltaRule { c0: 1.0, exponent: 1.0 }.validate().is_err());
    }

    #[test]
    fn zero_window_maps_to_free_evolution() {
        let f = gaussian(0.3);
        let z = TimeWindowField::new(0.1, vec![SpectralField::zeros(grid()); 9]).unwrap();
        let out = duhamel_apply(&f, &z).unwrap();
        let free = TimeWindowField::free(&f, 0.1, 8).unwrap();
        assert!(out.sup_distance(&free, 0.0, 0.0).unwrap() < 1e-14);
        let zero = duhamel_apply(&SpectralField::zeros(grid()), &z).unwrap();
        assert_eq!(zero.sup_norm(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn odd_window_is_rejected() {
        let z = TimeWindowField::new(0.1, vec![SpectralField::zeros(grid()); 4]).unwrap();
        assert!(matches!(duhamel_apply(&gaussian(0.1), &z), Err(Error::OddWindow(3))));
    }

    #[test]
    fn cumulative_quadrature_is_exact_for_cubics() {
        let g = grid();
        let h = 0.1;
        let base = gaussian(1.0);
        let vals: Vec<SpectralField> = (0..=7)
            .map(|j| {
                let t = h * j as f64;
                base.scaled(1.0 + t - 2.0 * t * t + 3.0 * t * t * t)
            })
            .collect();
        let ints = cumulative_integral(&vals, h).unwrap();
        for (j, i) in ints.iter().enumerate() {
            let t = h * j as f64;
            let exact = t + t * t / 2.0 - 2.0 * t.powi(3) / 3.0 + 0.75 * t.powi(4);
            let diff = &base.scaled(exact) - i;
            assert!(diff.l2_norm() < 1e-12 * base.l2_norm(), "node {j}");
        }
        let _ = g;
    }

    #[test]
    fn zero_data_converges_immediately() {
        let out = picard_iterate(&SpectralField::zeros(grid()), 0.1, &PicardOptions::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations(), 1);
        assert_eq!(out.window.sup_norm(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn linear_iteration_is_one_step_free_evolution() {
        let f = gaussian(0.5);
        let opts = PicardOptions {
            nonlinear: false,
            ..Default::default()
        };
        let out = picard_iterate(&f, 0.05, &opts).unwrap();
        assert!(out.converged && out.iterations() == 1);
        let free = TimeWindowField::free(&f.dealias(), 0.05, 64).unwrap();
        assert_eq!(out.window.sup_distance(&free, 0.0, 0.0).unwrap(), 0.0);
        let check = doubling_check(&f.dealias(), &out.window, 0.5, 0.0).unwrap();
        assert!((check.ratio - 1.0).abs() < 1e-12 && check.passed);
    }

    #[test]
    fn small_data_contracts() {
        let f = gaussian(0.1);
        let delta = delta_rule(gevrey_norm(&f, 0.5, 0.0).unwrap(), DeltaRule { c0: 0.4, exponent: 2.0 });
        let out = picard_iterate(&f, delta, &PicardOptions::default()).unwrap();
        assert!(out.converged);
        assert!(out.ratios().iter().all(|r| *r < 1.0), "{:?}", out.ratios());
    }

    #[test]
    fn zero_data_doubling_is_vacuous() {
        let z = SpectralField::zeros(grid());
        let w = TimeWindowField::free(&z, 0.1, 4).unwrap();
        let c = doubling_check(&z, &w, 0.5, 0.0).unwrap();
        assert!(c.passed);
    }
}
