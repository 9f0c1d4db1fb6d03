use kp5::acceptance::{data_suite, scaling_config, suite_grid};
use kp5::diagnostics::radius::default_band;
use kp5::diagnostics::{
    almost_conservation_run, bilinear_ladder, energy_identity_check, radius_estimate, uniqueness_gap, BilinearOptions,
};
use kp5::integrator::cfl_dt;
use kp5::operators::{semigroup_apply, GevreyParams};
use kp5::{InitialData, SpectralField};
use num_complex::Complex64;
use proptest::prelude::*;

/// Exponential spectrum `a exp(-sigma |xi| - rho |eta|)` translated by
/// `(x0, y0)`, built directly from wavenumbers.
fn planted(sigma: f64, rho: f64, a: f64, x0: f64, y0: f64) -> SpectralField {
    let g = suite_grid();
    let (dxi, deta) = (g.dxi(), g.deta());
    SpectralField::from_modes(g, |kx, ky| {
        if kx == 0 {
            return Complex64::default();
        }
        let (xi, eta) = (kx as f64 * dxi, ky as f64 * deta);
        a * (-sigma * xi.abs() - rho * eta.abs()).exp() * Complex64::from_polar(1.0, -(xi * x0 + eta * y0))
    })
    .unwrap()
    .dealias()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn radius_is_exact_on_planted_spectra(
        sigma in 0.1..2.5f64, rho in 0.0..1.0f64, a in 1e-3..1e3f64, x0 in 0.0..50.0f64, y0 in 0.0..50.0f64,
    ) {
        let s = planted(sigma, rho, a, x0, y0);
        let fit = radius_estimate(&s, default_band(s.grid())).unwrap();
        prop_assert!((fit.sigma_est - sigma).abs() <= 1e-10, "{} vs {sigma}", fit.sigma_est);
        prop_assert!(fit.residual <= 1e-10);
    }

    #[test]
    fn radius_is_invariant_under_free_flow(sigma in 0.1..2.5f64, t in -20.0..20.0f64) {
        let s = planted(sigma, 0.3, 1.0, 3.0, 1.0);
        let band = default_band(s.grid());
        let before = radius_estimate(&s, band).unwrap().sigma_est;
        let after = radius_estimate(&semigroup_apply(&s, t), band).unwrap().sigma_est;
        prop_assert!((before - after).abs() <= 1e-12);
    }
}

#[test]
fn defect_shrinks_monotonically_toward_zero_radius() {
    let ladder = [0.1, 0.05, 0.025, 0.0125];
    for data in data_suite() {
        let mut cfg = scaling_config();
        cfg.initial = data;
        let table = almost_conservation_run(&cfg, &ladder).unwrap();
        let d: Vec<f64> = table.rows.iter().map(|r| r.d.abs()).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{data:?}: {d:?}");
        let at_zero = almost_conservation_run(&cfg, &[0.0]).unwrap().rows[0].d.abs();
        assert!(at_zero <= 1e-3 * d[d.len() - 1], "{data:?}: D(0) = {at_zero:e}");
    }
}

#[test]
fn energy_identity_balances_at_several_radii() {
    let f = InitialData::Gaussian {
        amplitude: 4.0,
        width: 3.0,
    }
    .build(&suite_grid())
    .unwrap();
    let dt = cfl_dt(&suite_grid(), 1.0);
    for sigma in [0.0, 0.1, 0.5] {
        let e = energy_identity_check(&f, sigma, 0.0, dt, 16).unwrap();
        if sigma == 0.0 {
            assert!(e.lhs.abs() <= 1e-9 * f.l2_norm().powi(2), "{e:?}");
        } else {
            assert!(e.rel_err <= 1e-3, "{e:?}");
        }
    }
}

#[test]
fn gap_stays_inside_gronwall_envelope() {
    let g = suite_grid();
    for data in data_suite().into_iter().take(3) {
        let f = data.build(&g).unwrap();
        let run = uniqueness_gap(&f, 1e-6, 0.5, cfl_dt(&g, 1.0), true, 4).unwrap();
        assert!(run.max_ratio <= 1.1, "{data:?}: {}", run.max_ratio);
        assert!(run.samples.windows(2).all(|w| w[1].bound >= w[0].bound));
    }
}

#[test]
fn weighted_self_product_constant_is_resolution_stable() {
    let p = GevreyParams {
        sigma1: 0.5,
        s1: 0.0,
        ..GevreyParams::default()
    };
    let opts = BilinearOptions {
        trials: 24,
        n: 16,
        self_product: true,
        seed: 11,
        ..BilinearOptions::default()
    };
    let ladder = bilinear_ladder(&p, &opts).unwrap();
    assert!(ladder.coarse.max > 0.0 && ladder.fine.max.is_finite());
    assert!(ladder.growth <= 2.0, "growth {}", ladder.growth);
}
