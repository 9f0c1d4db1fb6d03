//! Measurements on simulated fields: spectral radius fits, Gevrey-norm
//! growth over short windows, long-time radius decay, two-run stability
//! envelopes and windowed space-time norms.

pub mod bilinear;
pub mod bourgain;
pub mod conservation;
pub mod decay;
pub mod radius;
pub mod uniqueness;

pub use bilinear::{bilinear_ladder, bilinear_ratio, BilinearLadder, BilinearOptions, BilinearReport};
pub use bourgain::{bourgain_norm, bourgain_norm_weighted, BourgainWeight, SpaceTimeField};
pub use conservation::{almost_conservation_run, energy_identity_check, EnergyIdentity, LadderRow, LadderTable};
pub use decay::{radius_decay_run, DecayRun, DecaySample};
pub use radius::{radius_estimate, RadiusFit};
pub use uniqueness::{uniqueness_gap, GapSample, UniquenessRun};

/// Least-squares line through `(x, y)`; returns `(slope, rms residual)`.
pub(crate) fn fit_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let ss: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (my + slope * (p.0 - mx));
            r * r
        })
        .sum();
    (slope, (ss / n).sqrt())
}

/// Composite Simpson rule on uniformly spaced samples; a trailing odd
/// interval is closed with a 3/8 panel.
pub(crate) fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (samples[0] + samples[1]),
        _ => {
            let even = if n.is_multiple_of(2) { n } else { n - 3 };
            let mut acc = 0.0;
            for i in (0..even).step_by(2) {
                acc += h / 3.0 * (samples[i] + 4.0 * samples[i + 1] + samples[i + 2]);
            }
            if even < n {
                let s = &samples[even..];
                acc += 3.0 * h / 8.0 * (s[0] + 3.0 * s[1] + 3.0 * s[2] + s[3]);
            }
            acc
        }
    }
}
