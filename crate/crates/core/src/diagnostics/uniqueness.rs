//! Separation of two nearby solutions against the Gronwall envelope
//! `eps exp(int_0^t (||u_x||_inf + ||v_x||_inf))`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::initial::InitialData;
use crate::integrator::{plan_steps, Stepper};
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub t: f64,
    pub gap: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessRun {
    pub samples: Vec<GapSample>,
    /// `max gap / bound` over samples with a positive bound.
    pub max_ratio: f64,
}

/// Unit-L^2 perturbation shape: an x-derivative of a Gaussian of width 3.
pub fn unit_bump(grid: &crate::spectral::Grid2D) -> Result<SpectralField> {
    let b = InitialData::GaussianDx {
        amplitude: 1.0,
        width: 3.0,
    }
    .build(grid)?;
    let n = b.l2_norm();
    Ok(b.scaled(1.0 / n))
}

fn max_slope(s: &SpectralField) -> Result<f64> {
    Ok(s.x_derivative().inverse()?.max_abs())
}

/// Evolves `f` and `f + eps * bump` side by side to `horizon`, recording
/// a sample every `every` steps (and at the end).
pub fn uniqueness_gap(
    f: &SpectralField,
    eps: f64,
    horizon: f64,
    dt_target: f64,
    nonlinear: bool,
    every: usize,
) -> Result<UniquenessRun> {
    let f = f.dealias();
    let mut g = f.clone();
    g.add_scaled(eps, &unit_bump(f.grid())?)?;
    let sample = |t: f64, u: &SpectralField, v: &SpectralField, integral: f64| GapSample {
        t,
        gap: (u - v).l2_norm(),
        bound: eps * integral.exp(),
    };
    let mut samples = vec![sample(0.0, &f, &g, 0.0)];
    let (n, dt) = plan_steps(horizon, dt_target);
    if n > 0 {
        let mut u = Stepper::with_options(f, dt, nonlinear, false)?;
        let mut v = Stepper::with_options(g, dt, nonlinear, false)?;
        let mut rate = max_slope(u.field())? + max_slope(v.field())?;
        let mut integral = 0.0;
        for i in 1..=n {
            u.step()?;
            v.step()?;
            let next = max_slope(u.field())? + max_slope(v.field())?;
            integral += 0.5 * dt * (rate + next);
            rate = next;
            if i % every.max(1) == 0 || i == n {
                let t = if i == n { horizon } else { dt * i as f64 };
                samples.push(sample(t, u.field(), v.field(), integral));
            }
        }
    }
    let max_ratio = samples
        .iter()
        .filter(|s| s.bound > 0.0)
        .map(|s| s.gap / s.bound)
        .fold(0.0, f64::max);
    Ok(UniquenessRun { samples, max_ratio })
}
