//! Integrating-factor RK4 for `u_t = i m(D) u - (1/2) d_x (u^2)`.
//!
//! The dispersive part is integrated exactly through the phase tables of
//! `S(t) = exp(i t m)`; RK4 is applied in the rotated frame `v = S(-t) u`,
//! where the stiff `xi^5` and `eta^2/xi` frequencies no longer appear.

use num_complex::Complex64;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::operators::{apply_phases, DispersionSymbol};
use crate::record::DiagnosticsRecord;
use crate::spectral::SpectralField;

/// Any norm above this multiple of the initial norm aborts the run.
pub const BLOW_UP_FACTOR: f64 = 1e8;

/// `-(1/2) d_x P(u^2)`, the divergence form of `-u u_x`.
pub fn nonlinearity(s: &SpectralField) -> Result<SpectralField> {
    Ok(nonlinearity_with_peak(s)?.0)
}

/// Nonlinearity plus `max |u|` from the same physical-space pass.
fn nonlinearity_with_peak(s: &SpectralField) -> Result<(SpectralField, f64)> {
    let p = s.inverse()?;
    let peak = p.max_abs();
    let grid = *p.grid();
    let mut w = p.into_values();
    for v in w.iter_mut() {
        *v *= *v;
    }
    let sq = crate::spectral::PhysicalField::new(grid, w)?.forward().dealias();
    Ok((sq.x_derivative().scaled(-0.5), peak))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub steps: u64,
    /// Largest advective ratio `dt * max|u| * max|xi|` seen so far.
    pub max_cfl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperState {
    pub field: SpectralField,
    pub t: f64,
    pub dt: f64,
    pub stats: StepStats,
}

/// Fixed-step IF-RK4 stepper owning its state.
#[derive(Debug, Clone)]
pub struct Stepper {
    state: StepperState,
    full: Vec<Complex64>,
    half: Vec<Complex64>,
    /// `+1` forward; `-1` integrates the reversed system (negated dispersion
    /// and nonlinearity) while `t` still counts up.
    direction: f64,
    nonlinear: bool,
    reference_norm: f64,
    xi_max: f64,
}

impl Stepper {
    pub fn new(field: SpectralField, dt: f64) -> Result<Self> {
        Self::with_options(field, dt, true, false)
    }

    /// Stepper with the nonlinearity switched off: each step is exactly `S(dt)`.
    pub fn linear(field: SpectralField, dt: f64) -> Result<Self> {
        Self::with_options(field, dt, false, false)
    }

    pub fn with_options(field: SpectralField, dt: f64, nonlinear: bool, reversed: bool) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("{dt} must be finite and > 0"),
            });
        }
        let g = *field.grid();
        let direction = if reversed { -1.0 } else { 1.0 };
        let sym = DispersionSymbol::new(g);
        let reference_norm = field.l2_norm();
        Ok(Self {
            full: sym.phases(direction * dt),
            half: sym.phases(0.5 * direction * dt),
            state: StepperState {
                field,
                t: 0.0,
                dt,
                stats: StepStats::default(),
            },
            direction,
            nonlinear,
            reference_norm,
            xi_max: g.max_dealiased_xi(),
        })
    }

    /// Restarts the clock at `t` (used when resuming from a window boundary).
    pub fn at_time(mut self, t: f64) -> Self {
        self.state.t = t;
        self
    }

    pub fn state(&self) -> &StepperState {
        &self.state
    }

    pub fn field(&self) -> &SpectralField {
        &self.state.field
    }

    pub fn t(&self) -> f64 {
        self.state.t
    }

    pub fn into_state(self) -> StepperState {
        self.state
    }

    fn blow_up(&self, reason: impl Into<String>) -> Error {
        Error::BlowUp {
            t: self.state.t,
            reason: reason.into(),
        }
    }

    fn rhs(&self, s: &SpectralField) -> Result<(SpectralField, f64)> {
        match nonlinearity_with_peak(s) {
            Ok((n, peak)) => Ok((n, peak)),
            Err(Error::NonFinite { .. }) => Err(self.blow_up("non-finite stage value")),
            Err(e) => Err(e),
        }
    }

    /// Advances one step of size `dt`.
    pub fn step(&mut self) -> Result<()> {
        let h = self.direction * self.state.dt;
        let u = &self.state.field;
        let next = if self.nonlinear {
            let (a, peak) = self.rhs(u)?;
            let u_half = apply_phases(u, &self.half);
            let a_half = apply_phases(&a, &self.half);

            let mut u2 = u_half.clone();
            u2.add_scaled(0.5 * h, &a_half)?;
            let (b, _) = self.rhs(&u2)?;

            let mut u3 = u_half;
            u3.add_scaled(0.5 * h, &b)?;
            let (c, _) = self.rhs(&u3)?;

            let mut u4 = apply_phases(u, &self.full);
            let c_half = apply_phases(&c, &self.half);
            let u_full = u4.clone();
            u4.add_scaled(h, &c_half)?;
            let (d, _) = self.rhs(&u4)?;

            let mut mid = b;
            mid.add_scaled(1.0, &c)?;
            let mut next = u_full;
            next.add_scaled(h / 6.0, &apply_phases(&a, &self.full))?;
            next.add_scaled(h / 3.0, &apply_phases(&mid, &self.half))?;
            next.add_scaled(h / 6.0, &d)?;

            let cfl = self.state.dt * peak * self.xi_max;
            self.state.stats.max_cfl = self.state.stats.max_cfl.max(cfl);
            next
        } else {
            apply_phases(u, &self.full)
        };
        let norm = next.l2_norm();
        if !norm.is_finite() {
            return Err(self.blow_up("non-finite field"));
        }
        if self.reference_norm > 0.0 && norm > BLOW_UP_FACTOR * self.reference_norm {
            return Err(self.blow_up(format!("L2 norm {norm:.3e} exceeds {BLOW_UP_FACTOR:.0e} x initial")));
        }
        self.state.field = next;
        self.state.t += self.state.dt;
        self.state.stats.steps += 1;
        Ok(())
    }

    pub fn run(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }
}

/// Step count and uniform step size that land exactly on `horizon`.
pub fn plan_steps(horizon: f64, dt_target: f64) -> (usize, f64) {
    if horizon <= 0.0 {
        return (0, dt_target);
    }
    let n = ((horizon / dt_target) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, horizon / n as f64)
}

/// `cfl / max |dm/dxi|` over dealiased modes.
pub fn cfl_dt(grid: &crate::spectral::Grid2D, cfl: f64) -> f64 {
    cfl / DispersionSymbol::new(*grid).max_group_velocity()
}

/// Evolves `field` over `horizon` with steps no larger than `dt_target`.
pub fn evolve(field: &SpectralField, horizon: f64, dt_target: f64, nonlinear: bool) -> Result<SpectralField> {
    let (n, dt) = plan_steps(horizon, dt_target);
    if n == 0 {
        return Ok(field.clone());
    }
    let mut st = Stepper::with_options(field.clone(), dt, nonlinear, false)?;
    st.run(n)?;
    Ok(st.into_state().field)
}

/// When to emit diagnostics during [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// Every `n` steps (and always at the start and the horizon).
    Steps(usize),
    /// Nearest step multiple of a time interval.
    Interval(f64),
}

impl Schedule {
    /// Steps between samples at step size `dt` (at least one).
    pub fn stride(&self, dt: f64) -> usize {
        match *self {
            Schedule::Steps(n) => n.max(1),
            Schedule::Interval(tau) => ((tau / dt).round() as usize).max(1),
        }
    }
}

/// Runs the configured simulation, handing each record (and the field it was
/// measured on) to `on_record` as soon as it exists, and the field at the
/// step nearest each configured snapshot time to `on_snapshot`. On blow-up
/// everything already emitted stays with the callbacks and the error is
/// returned.
pub fn simulate_with(
    cfg: &SimConfig,
    schedule: Schedule,
    mut on_record: impl FnMut(&DiagnosticsRecord, &SpectralField),
    mut on_snapshot: impl FnMut(f64, &SpectralField) -> Result<()>,
) -> Result<()> {
    let grid = cfg.grid()?;
    let f = cfg.initial.build(&grid)?;
    let (n, dt) = plan_steps(cfg.time.horizon, cfg.dt_target(&grid));
    let mut snaps: Vec<usize> = cfg
        .output
        .snapshot_times
        .iter()
        .map(|&ts| ((ts / dt).round() as usize).min(n))
        .collect();
    snaps.sort_unstable();
    snaps.dedup();
    let time_at = |i: usize| if i == n { cfg.time.horizon } else { dt * i as f64 };
    let first = DiagnosticsRecord::measure(&f, 0.0, 0, cfg)?;
    on_record(&first, &f);
    if snaps.first() == Some(&0) {
        on_snapshot(0.0, &f)?;
    }
    if n == 0 {
        return Ok(());
    }
    let stride = schedule.stride(dt);
    let mut st = Stepper::new(f, dt)?;
    for i in 1..=n {
        st.step()?;
        if i % stride == 0 || i == n {
            let rec = DiagnosticsRecord::measure(st.field(), time_at(i), i as u64, cfg)?;
            on_record(&rec, st.field());
        }
        if snaps.binary_search(&i).is_ok() {
            on_snapshot(time_at(i), st.field())?;
        }
    }
    Ok(())
}

/// Collecting wrapper around [`simulate_with`].
pub fn simulate(cfg: &SimConfig, schedule: Schedule) -> Result<Vec<DiagnosticsRecord>> {
    let mut out = Vec::new();
    simulate_with(cfg, schedule, |r, _| out.push(r.clone()), |_, _| Ok(()))?;
    Ok(out)
}
