use std::f64::consts::PI;

use kp5::integrator::{cfl_dt, evolve, nonlinearity, plan_steps, Stepper};
use kp5::operators::semigroup_apply;
use kp5::{Grid2D, InitialData, SpectralField};
use proptest::prelude::*;

fn grid() -> Grid2D {
    Grid2D::square(32, 16.0 * PI).unwrap()
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    let mut d = a.clone();
    d.add_scaled(-1.0, b).unwrap();
    d.l2_norm() / b.l2_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stepping_keeps_fields_real_and_mean_free(a in 0.1..2.0f64, w in 2.0..5.0f64, dx in prop::bool::ANY) {
        let d = if dx {
            InitialData::GaussianDx { amplitude: a, width: w }
        } else {
            InitialData::Gaussian { amplitude: a, width: w }
        };
        let f = d.build(&grid()).unwrap();
        let mut st = Stepper::new(f.clone(), cfl_dt(&grid(), 1.0)).unwrap();
        for _ in 0..5 {
            st.run(4).unwrap();
            let u = st.field();
            prop_assert!(u.is_hermitian());
            prop_assert!(u.is_zero_x_mean());
            prop_assert!(u.x_mean_mass() == 0.0);
        }
        let drift = (st.field().l2_norm() - f.l2_norm()).abs() / f.l2_norm();
        prop_assert!(drift <= 1e-10, "drift {drift:e}");
    }

    #[test]
    fn linear_stepper_is_the_free_flow(t in 0.0..3.0f64) {
        let f = InitialData::default().build(&grid()).unwrap();
        let u = evolve(&f, t, cfl_dt(&grid(), 1.0), false).unwrap();
        prop_assert!(rel(&u, &semigroup_apply(&f, t)) <= 1e-13);
    }
}

#[test]
fn nonlinearity_has_no_x_mean() {
    let f = InitialData::Gaussian {
        amplitude: 1.0,
        width: 3.0,
    }
    .build(&grid())
    .unwrap();
    let n = nonlinearity(&f).unwrap();
    assert!(n.is_zero_x_mean() && n.is_hermitian());
}

#[test]
fn reversed_run_recovers_data() {
    let f = InitialData::Gaussian {
        amplitude: 1.0,
        width: 3.0,
    }
    .build(&grid())
    .unwrap();
    let (n, dt) = plan_steps(0.5, cfl_dt(&grid(), 1.0));
    let mut fwd = Stepper::new(f.clone(), dt).unwrap();
    fwd.run(n).unwrap();
    let mut back = Stepper::with_options(fwd.field().clone(), dt, true, true).unwrap();
    back.run(n).unwrap();
    let err = rel(back.field(), &f);
    assert!(err <= 1e-9, "round trip error {err:e}");
}

#[test]
fn drift_falls_with_step_size() {
    // Large amplitude keeps the drift above roundoff at both step sizes.
    let f = InitialData::Gaussian {
        amplitude: 4.0,
        width: 3.0,
    }
    .build(&grid())
    .unwrap();
    let dt = cfl_dt(&grid(), 1.0);
    let reference = evolve(&f, 0.5, dt / 8.0, true).unwrap();
    let e1 = rel(&evolve(&f, 0.5, dt, true).unwrap(), &reference);
    let e2 = rel(&evolve(&f, 0.5, dt / 2.0, true).unwrap(), &reference);
    let order = (e1 / e2).log2();
    assert!(order >= 3.5, "order {order} from {e1:e}, {e2:e}");
}
