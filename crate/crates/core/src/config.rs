//! Run configuration: TOML on disk, JSON inside run manifests.
//!
//! Every section and key is optional; omitted values take the defaults below.
//! Unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//! [grid]
//! nx = 128
//! ny = 128
//! lx = 100.53096491487338   # 32 pi
//! ly = 100.53096491487338
//! [time]
//! cfl = 1.0                 # dt = cfl / max |dm/dxi|, unless `dt` is set
//! horizon = 1.0
//! sample_interval = 0.1
//! [initial]
//! kind = "gaussian"         # gaussian | gaussian_dx | line_soliton | exp_spectrum
//! amplitude = 0.5
//! width = 4.0
//! [gevrey]
//! sigma1 = 0.5
//! sigma2 = 0.0
//! ladder = [0.0125, 0.025, 0.05, 0.1]
//! [delta]
//! c0 = 0.2
//! exponent = 2.0
//! [picard]
//! m = 64
//! n_max = 60
//! tol = 1e-9
//! ```

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::BilinearOptions;
use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::integrator::cfl_dt;
use crate::operators::GevreyParams;
use crate::picard::DeltaRule;
use crate::spectral::Grid2D;

/// `c0` produced by the shipped calibration run (see `picard::calibrate_c0`).
pub const CALIBRATED_C0: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nx: 128,
            ny: 128,
            lx: 32.0 * PI,
            ly: 32.0 * PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub cfl: f64,
    /// Fixed step; overrides `cfl` when present.
    pub dt: Option<f64>,
    pub horizon: f64,
    /// Time between emitted records; defaults to `horizon / 10`.
    pub sample_interval: Option<f64>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            cfl: 1.0,
            dt: None,
            horizon: 1.0,
            sample_interval: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GevreyConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    pub ladder: Vec<f64>,
}

impl Default for GevreyConfig {
    fn default() -> Self {
        Self {
            sigma1: 0.5,
            sigma2: 0.0,
            ladder: vec![0.0125, 0.025, 0.05, 0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaConfig {
    pub c0: f64,
    pub exponent: f64,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        Self {
            c0: CALIBRATED_C0,
            exponent: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardConfig {
    pub m: usize,
    pub n_max: usize,
    pub tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            m: 64,
            n_max: 60,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilinearConfig {
    pub trials: usize,
    pub s1: f64,
    pub s2: f64,
    pub b: f64,
    pub beta: f64,
    pub eps: f64,
    /// Length of the tapered time window.
    pub window: f64,
    /// Coarse lattice size; the ladder also runs at twice this.
    pub n: usize,
}

impl Default for BilinearConfig {
    fn default() -> Self {
        let p = GevreyParams::default();
        Self {
            trials: 200,
            s1: p.s1,
            s2: p.s2,
            b: p.b,
            beta: p.beta,
            eps: p.eps,
            window: 4.0,
            n: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiusConfig {
    /// Fit band as fractions of the largest dealiased `|xi|`.
    pub band_lo: f64,
    pub band_hi: f64,
}

impl Default for RadiusConfig {
    fn default() -> Self {
        Self {
            band_lo: 0.25,
            band_hi: 0.75,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniquenessConfig {
    pub epsilon: f64,
}

impl Default for UniquenessConfig {
    fn default() -> Self {
        Self { epsilon: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub name: String,
    pub snapshot_times: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "runs".into(),
            name: "default".into(),
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub initial: InitialData,
    pub gevrey: GevreyConfig,
    pub delta: DeltaConfig,
    pub picard: PicardConfig,
    pub bilinear: BilinearConfig,
    pub radius: RadiusConfig,
    pub uniqueness: UniquenessConfig,
    pub output: OutputConfig,
}

fn range(field: &str, reason: impl Into<String>) -> Error {
    Error::ConfigRange {
        field: field.into(),
        reason: reason.into(),
    }
}

impl SimConfig {
    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.grid.nx, self.grid.ny, self.grid.lx, self.grid.ly)
    }

    pub fn dt_target(&self, grid: &Grid2D) -> f64 {
        self.time.dt.unwrap_or_else(|| cfl_dt(grid, self.time.cfl))
    }

    pub fn sample_interval(&self) -> f64 {
        self.time.sample_interval.unwrap_or(self.time.horizon / 10.0)
    }

    pub fn delta_rule(&self) -> DeltaRule {
        DeltaRule {
            c0: self.delta.c0,
            exponent: self.delta.exponent,
        }
    }

    /// Trial options for the bilinear experiment, seeded from `self.seed`.
    pub fn bilinear_options(&self) -> BilinearOptions {
        BilinearOptions {
            trials: self.bilinear.trials,
            n: self.bilinear.n,
            window: self.bilinear.window,
            seed: self.seed,
            ..BilinearOptions::default()
        }
    }

    pub fn bilinear_params(&self) -> GevreyParams {
        GevreyParams {
            sigma1: 0.0,
            sigma2: 0.0,
            s1: self.bilinear.s1,
            s2: self.bilinear.s2,
            b: self.bilinear.b,
            beta: self.bilinear.beta,
            eps: self.bilinear.eps,
        }
    }

    pub fn radius_band(&self, grid: &Grid2D) -> (f64, f64) {
        let top = grid.max_dealiased_xi();
        (self.radius.band_lo * top, self.radius.band_hi * top)
    }

    /// Checks every numeric range, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let grid = Grid2D::new(self.grid.nx, self.grid.ny, self.grid.lx, self.grid.ly)
            .map_err(|e| range("grid", e.to_string()))?;
        let t = &self.time;
        if !(t.cfl.is_finite() && t.cfl > 0.0) {
            return Err(range("time.cfl", format!("{} must be > 0", t.cfl)));
        }
        if let Some(dt) = t.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(range("time.dt", format!("{dt} must be > 0")));
            }
        }
        if !(t.horizon.is_finite() && t.horizon >= 0.0) {
            return Err(range("time.horizon", format!("{} must be >= 0", t.horizon)));
        }
        if let Some(s) = t.sample_interval {
            if !(s.is_finite() && s > 0.0) {
                return Err(range("time.sample_interval", format!("{s} must be > 0")));
            }
        }
        self.initial.validate().map_err(|e| range("initial", e.to_string()))?;
        let gv = &self.gevrey;
        grid.check_gevrey(gv.sigma1, gv.sigma2)
            .map_err(|e| range("gevrey.sigma1", e.to_string()))?;
        for &s in &gv.ladder {
            grid.check_gevrey(s, 0.0)
                .map_err(|e| range("gevrey.ladder", e.to_string()))?;
        }
        let d = &self.delta;
        if !(d.c0.is_finite() && d.c0 > 0.0) {
            return Err(range("delta.c0", format!("{} must be > 0", d.c0)));
        }
        if !(d.exponent.is_finite() && d.exponent > 1.0) {
            return Err(range("delta.exponent", format!("{} must be > 1", d.exponent)));
        }
        let p = &self.picard;
        if p.m < 2 || !p.m.is_multiple_of(2) {
            return Err(range("picard.m", format!("{} must be even and >= 2", p.m)));
        }
        if p.n_max == 0 {
            return Err(range("picard.n_max", "must be >= 1"));
        }
        if !(p.tol.is_finite() && p.tol > 0.0) {
            return Err(range("picard.tol", format!("{} must be > 0", p.tol)));
        }
        let b = &self.bilinear;
        if b.trials == 0 {
            return Err(range("bilinear.trials", "must be >= 1"));
        }
        if !(b.window.is_finite() && b.window > 0.0) {
            return Err(range("bilinear.window", format!("{} must be > 0", b.window)));
        }
        Grid2D::square(b.n, 1.0).map_err(|e| range("bilinear.n", e.to_string()))?;
        self.bilinear_params()
            .check_bilinear_admissible()
            .map_err(|e| range("bilinear", e.to_string()))?;
        let r = &self.radius;
        if !(r.band_lo > 0.0 && r.band_lo < r.band_hi && r.band_hi <= 1.0) {
            return Err(range(
                "radius",
                format!("need 0 < band_lo < band_hi <= 1, got [{}, {}]", r.band_lo, r.band_hi),
            ));
        }
        if !(self.uniqueness.epsilon.is_finite() && self.uniqueness.epsilon >= 0.0) {
            return Err(range("uniqueness.epsilon", "must be >= 0"));
        }
        if self.output.snapshot_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(range("output.snapshot_times", "times must be >= 0"));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
            line: e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Accepts either a bare config object or a run manifest with a `config` key.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::ConfigParse {
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        let inner = match value.get("config") {
            Some(c) if value.get("manifest_version").is_some() => c.clone(),
            _ => value,
        };
        let cfg: SimConfig = serde_json::from_value(inner).map_err(|e| Error::ConfigParse {
            line: None,
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Loads a `.toml` config, or a `.json` config/manifest.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        SimConfig::from_json_str(&text)
    } else {
        SimConfig::from_toml_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        let cfg = SimConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, SimConfig::default());
    }

    #[test]
    fn parses_sections_and_initial_kind() {
        let cfg = SimConfig::from_toml_str(
            "seed = 9\n[grid]\nnx = 64\nny = 32\n[initial]\nkind = \"exp_spectrum\"\namplitude = 0.1\nsigma = 1.0\nrho = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!((cfg.grid.nx, cfg.grid.ny), (64, 32));
        assert_eq!(cfg.initial.native_sigma(), Some(1.0));
    }

    #[test]
    fn unknown_key_is_a_parse_error_with_line() {
        match SimConfig::from_toml_str("[grid]\nnx = 64\nnz = 3\n") {
            Err(Error::ConfigParse { line, .. }) => assert_eq!(line, Some(3)),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn sigma_beyond_guard_names_max() {
        let err = SimConfig::from_toml_str("[gevrey]\nsigma1 = 1000.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gevrey.sigma1") && msg.contains("max admissible"), "{msg}");
    }

    #[test]
    fn odd_grid_is_range_error() {
        let err = SimConfig::from_toml_str("[grid]\nnx = 63\n").unwrap_err();
        assert!(matches!(err, Error::ConfigRange { .. }));
        assert!(err.is_validation());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut cfg = SimConfig::default();
        cfg.time.dt = Some(1.0 / 3.0);
        cfg.gevrey.ladder = vec![0.1, 0.2 / 3.0];
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(SimConfig::from_json_str(&text).unwrap(), cfg);
    }
}
