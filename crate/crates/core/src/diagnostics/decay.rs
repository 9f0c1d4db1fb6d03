//! Long-time decay of the fitted x-radius.

use serde::{Deserialize, Serialize};

use super::fit_line;
use super::radius::radius_estimate;
use crate::config::SimConfig;
use crate::error::Result;
use crate::integrator::{plan_steps, Stepper};
use crate::operators::gevrey_norm;
use crate::picard::delta_rule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub t: f64,
    pub sigma_est: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRun {
    /// Radius of the initial data (the reference for the plateau).
    pub sigma_ref: f64,
    /// Window length used between samples.
    pub delta: f64,
    pub samples: Vec<DecaySample>,
    /// Exponent `p` of `sigma_est ~ A t^(-p)` over the last decade of `t`.
    pub tail_exponent: Option<f64>,
    /// `min t sigma_est(t)` over the same tail.
    pub c_emp: Option<f64>,
    /// First sample time at which the fitted radius reached zero.
    pub collapse: Option<f64>,
}

impl DecayRun {
    /// Samples from the last decade in `t`.
    pub fn tail(&self) -> impl Iterator<Item = &DecaySample> {
        let t_end = self.samples.last().map_or(0.0, |s| s.t);
        self.samples.iter().filter(move |s| s.t > 0.0 && s.t >= t_end / 10.0)
    }

    /// Largest relative deviation from `sigma_ref` over samples with
    /// `t < sigma_ref / c_emp`.
    pub fn plateau_deviation(&self) -> Option<f64> {
        let c = self.c_emp?;
        let t_star = self.sigma_ref / c;
        self.samples
            .iter()
            .filter(|s| s.t < t_star)
            .map(|s| (s.sigma_est - self.sigma_ref).abs() / self.sigma_ref)
            .reduce(f64::max)
    }
}

/// Advances the configured data to `horizon` in windows of length
/// `delta_rule(||f||_{G^{sigma1, 0}})`, fitting the radius after each
/// window. `nonlinear = false` runs free evolution.
pub fn radius_decay_run(cfg: &SimConfig, horizon: f64, nonlinear: bool) -> Result<DecayRun> {
    let grid = cfg.grid()?;
    let band = cfg.radius_band(&grid);
    let f = cfg.initial.build(&grid)?;
    let sigma1 = cfg.initial.native_sigma().unwrap_or(cfg.gevrey.sigma1);
    let delta = delta_rule(gevrey_norm(&f, sigma1, 0.0)?, cfg.delta_rule());
    let first = radius_estimate(&f, band)?;
    let mut samples = vec![DecaySample {
        t: 0.0,
        sigma_est: first.sigma_est,
        residual: first.residual,
    }];
    let mut collapse = None;
    if horizon > 0.0 {
        let (n, dt) = plan_steps(horizon, cfg.dt_target(&grid));
        let per_window = ((delta / dt).round() as usize).max(1);
        let mut st = Stepper::with_options(f, dt, nonlinear, false)?;
        let mut done = 0;
        while done < n {
            let k = per_window.min(n - done);
            st.run(k)?;
            done += k;
            let t = if done == n { horizon } else { dt * done as f64 };
            let fit = radius_estimate(st.field(), band)?;
            if fit.sigma_est == 0.0 && collapse.is_none() {
                collapse = Some(t);
            }
            samples.push(DecaySample {
                t,
                sigma_est: fit.sigma_est,
                residual: fit.residual,
            });
        }
    }
    let mut run = DecayRun {
        sigma_ref: first.sigma_est,
        delta,
        samples,
        tail_exponent: None,
        c_emp: None,
        collapse,
    };
    let tail: Vec<DecaySample> = run.tail().copied().collect();
    if tail.len() >= 2 && tail.iter().all(|s| s.sigma_est > 0.0) {
        let pts: Vec<(f64, f64)> = tail.iter().map(|s| (s.t.ln(), s.sigma_est.ln())).collect();
        run.tail_exponent = Some(-fit_line(&pts).0);
    }
    run.c_emp = tail.iter().map(|s| s.t * s.sigma_est).reduce(f64::min);
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialData;
    use std::f64::consts::PI;

    #[test]
    fn free_evolution_keeps_the_radius() {
        let mut cfg = SimConfig::default();
        cfg.grid.nx = 64;
        cfg.grid.ny = 32;
        cfg.grid.lx = 16.0 * PI;
        cfg.grid.ly = 16.0 * PI;
        cfg.initial = InitialData::ExpSpectrum {
            amplitude: 0.1,
            sigma: 1.0,
            rho: 0.5,
        };
        let run = radius_decay_run(&cfg, 2.0, false).unwrap();
        assert!(run.samples.len() > 2);
        for s in &run.samples {
            assert!((s.sigma_est - 1.0).abs() < 1e-10, "{s:?}");
        }
        assert!(run.collapse.is_none());
    }
}
