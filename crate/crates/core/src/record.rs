use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::diagnostics::radius::radius_estimate;
use crate::error::Result;
use crate::operators::{gevrey_norm, remainder_n};
use crate::output::{fmt_f64, fmt_opt};
use crate::spectral::SpectralField;

/// One time sample of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: u64,
    pub l2: f64,
    /// `||u||_{G^{sigma, 0}}` for each entry of the configured ladder.
    pub gevrey: Vec<f64>,
    /// Fitted x-radius; `None` when the spectrum has too little support.
    pub sigma_est: Option<f64>,
    pub residual: Option<f64>,
    /// `||N(u)||_{L^2}` at the configured `(sigma1, sigma2)`.
    pub remainder: f64,
}

impl DiagnosticsRecord {
    pub fn measure(s: &SpectralField, t: f64, step: u64, cfg: &SimConfig) -> Result<Self> {
        let grid = *s.grid();
        let gevrey = cfg
            .gevrey
            .ladder
            .iter()
            .map(|&sigma| gevrey_norm(s, sigma, 0.0))
            .collect::<Result<Vec<_>>>()?;
        let fit = radius_estimate(s, cfg.radius_band(&grid)).ok();
        let remainder = remainder_n(s, cfg.gevrey.sigma1, cfg.gevrey.sigma2)?.l2_norm();
        Ok(Self {
            t,
            step,
            l2: s.l2_norm(),
            gevrey,
            sigma_est: fit.map(|f| f.sigma_est),
            residual: fit.map(|f| f.residual),
            remainder,
        })
    }

    pub fn csv_header(ladder: &[f64]) -> Vec<String> {
        let mut h = vec!["t".to_string(), "l2".to_string()];
        h.extend(ladder.iter().map(|&s| format!("gevrey_{}", fmt_f64(s))));
        h.extend(["sigma_est", "residual", "remainder", "step"].map(String::from));
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let mut r = vec![fmt_f64(self.t), fmt_f64(self.l2)];
        r.extend(self.gevrey.iter().map(|&g| fmt_f64(g)));
        r.push(fmt_opt(self.sigma_est));
        r.push(fmt_opt(self.residual));
        r.push(fmt_f64(self.remainder));
        r.push(self.step.to_string());
        r
    }
}
