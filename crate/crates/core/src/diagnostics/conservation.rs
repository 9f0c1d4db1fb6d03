//! Short-window growth of Gevrey norms.
//!
//! With `U = A^{s1, s2} u`, the equation gives
//! `d/dt ||U||^2 = int U N(u)` where `N(u) = d_x[(Au)^2 - A(u^2)]`, so the
//! growth of `||U||^2` over a window is driven entirely by the remainder and
//! vanishes at zero radius.

use serde::{Deserialize, Serialize};

use super::{fit_line, simpson};
use crate::config::SimConfig;
use crate::error::Result;
use crate::integrator::{plan_steps, Stepper};
use crate::operators::{apply_gevrey, gevrey_norm, remainder_n};
use crate::par;
use crate::picard::delta_rule;
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub sigma: f64,
    /// Signed extreme of `||u(t)||^2 - ||f||^2` in `G^{sigma, 0}` over the window.
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderTable {
    pub delta: f64,
    pub rows: Vec<LadderRow>,
    /// Log-log slope of `|D|` against `sigma` over rows with both positive.
    pub slope: Option<f64>,
}

/// Runs one trajectory over `[0, delta]` and records, for every `sigma` in
/// `ladder`, the largest excursion of the squared `G^{sigma, 0}` norm.
///
/// `delta` comes from the configured rule applied to `||f||_{G^{sigma1, 0}}`.
pub fn almost_conservation_run(cfg: &SimConfig, ladder: &[f64]) -> Result<LadderTable> {
    let grid = cfg.grid()?;
    for &s in ladder {
        grid.check_gevrey(s, 0.0)?;
    }
    let f = cfg.initial.build(&grid)?;
    let delta = delta_rule(gevrey_norm(&f, cfg.gevrey.sigma1, 0.0)?, cfg.delta_rule());
    let squares = |u: &SpectralField| -> Result<Vec<f64>> {
        ladder.iter().map(|&s| gevrey_norm(u, s, 0.0).map(|n| n * n)).collect()
    };
    let base = squares(&f)?;
    let mut extreme = vec![0.0_f64; ladder.len()];
    let (n, dt) = plan_steps(delta, cfg.dt_target(&grid));
    let mut st = Stepper::new(f, dt)?;
    for _ in 0..n {
        st.step()?;
        for ((e, now), b) in extreme.iter_mut().zip(squares(st.field())?).zip(&base) {
            let d = now - b;
            if d.abs() > e.abs() {
                *e = d;
            }
        }
    }
    let rows: Vec<LadderRow> = ladder
        .iter()
        .zip(&extreme)
        .map(|(&sigma, &d)| LadderRow { sigma, d })
        .collect();
    Ok(LadderTable {
        delta,
        slope: log_slope(&rows),
        rows,
    })
}

fn log_slope(rows: &[LadderRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sigma > 0.0 && r.d != 0.0)
        .map(|r| (r.sigma.ln(), r.d.abs().ln()))
        .collect();
    (pts.len() >= 2).then(|| fit_line(&pts).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyIdentity {
    /// `||U(H)||^2 - ||U(0)||^2` from the integrated trajectory.
    pub lhs: f64,
    /// `int_0^H int U N(u) dx dt` by Simpson quadrature on the step grid.
    pub rhs: f64,
    pub rel_err: f64,
    pub dt: f64,
    pub steps: usize,
}

/// `int U N(u) dx` for the Fourier coefficients of a real field.
fn remainder_pairing(u: &SpectralField, sigma1: f64, sigma2: f64) -> Result<f64> {
    let big_u = apply_gevrey(&u.dealias(), sigma1, sigma2)?;
    let n = remainder_n(u, sigma1, sigma2)?;
    let ny = u.grid().ny;
    let nc = n.coeffs();
    let sum = par::sum_rows(big_u.coeffs(), ny, |j, row| {
        row.iter()
            .zip(&nc[j * ny..(j + 1) * ny])
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    });
    Ok(u.grid().area() * sum)
}

/// Compares the change of `||A u||^2` over `steps` steps of size `dt`
/// against the time integral of its predicted rate.
pub fn energy_identity_check(
    f: &SpectralField,
    sigma1: f64,
    sigma2: f64,
    dt: f64,
    steps: usize,
) -> Result<EnergyIdentity> {
    let norm2 = |u: &SpectralField| gevrey_norm(u, sigma1, sigma2).map(|n| n * n);
    let f = f.dealias();
    let start = norm2(&f)?;
    let mut rate = vec![remainder_pairing(&f, sigma1, sigma2)?];
    let mut st = Stepper::new(f, dt)?;
    for _ in 0..steps {
        st.step()?;
        rate.push(remainder_pairing(st.field(), sigma1, sigma2)?);
    }
    let lhs = norm2(st.field())? - start;
    let rhs = simpson(&rate, dt);
    let scale = lhs.abs().max(rhs.abs());
    let rel_err = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
    Ok(EnergyIdentity {
        lhs,
        rhs,
        rel_err,
        dt,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialData;
    use crate::spectral::Grid2D;
    use std::f64::consts::PI;

    #[test]
    fn zero_radius_pairing_vanishes() {
        let g = Grid2D::square(32, 16.0 * PI).unwrap();
        let f = InitialData::default().build(&g).unwrap();
        let p = remainder_pairing(&f, 0.0, 0.0).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let rows: Vec<LadderRow> = [0.1, 0.2, 0.4]
            .iter()
            .map(|&s| LadderRow { sigma: s, d: -3.0 * s })
            .collect();
        assert!((log_slope(&rows).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_sigma_ladder_entry_tracks_l2_drift() {
        let mut cfg = SimConfig::default();
        cfg.grid.nx = 32;
        cfg.grid.ny = 32;
        cfg.grid.lx = 16.0 * PI;
        cfg.grid.ly = 16.0 * PI;
        let table = almost_conservation_run(&cfg, &[0.0, 0.05]).unwrap();
        let l2 = cfg.initial.build(&cfg.grid().unwrap()).unwrap().l2_norm();
        assert!(table.rows[0].d.abs() <= 1e-6 * l2 * l2, "{table:?}");
        assert!(table.rows[1].d.abs() > table.rows[0].d.abs());
    }
}
