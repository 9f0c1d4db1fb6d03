//! Hot kernels at production sizes, each timed on the global rayon pool and
//! on a one-thread pool. Building with `--no-default-features` compiles the
//! sequential fallback instead, where both variants run the same code.

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use kp5::diagnostics::{bourgain_norm, SpaceTimeField};
use kp5::integrator::{cfl_dt, nonlinearity, Stepper};
use kp5::operators::{gevrey_norm, semigroup_apply, GevreyParams};
use kp5::{Grid2D, InitialData, SpectralField};

fn data(n: usize) -> (Grid2D, SpectralField) {
    let g = Grid2D::square(n, 32.0 * PI).unwrap();
    let f = InitialData::Gaussian {
        amplitude: 1.0,
        width: 4.0,
    }
    .build(&g)
    .unwrap();
    (g, f)
}

/// Runs `f` under each execution mode available in this build.
fn modes(c: &mut Criterion, name: &str, size: usize, mut f: impl FnMut() + Send) {
    let mut group = c.benchmark_group(name);
    #[cfg(feature = "parallel")]
    {
        group.bench_function(BenchmarkId::new("parallel", size), |b| b.iter(&mut f));
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        group.bench_function(BenchmarkId::new("one-thread", size), |b| one.install(|| b.iter(&mut f)));
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function(BenchmarkId::new("sequential", size), |b| b.iter(&mut f));
    group.finish();
}

fn transforms(c: &mut Criterion) {
    for n in [128, 256] {
        let (_, f) = data(n);
        let p = f.inverse().unwrap();
        modes(c, "fft2_roundtrip", n, || {
            black_box(black_box(&p).forward().inverse().unwrap());
        });
    }
}

fn products(c: &mut Criterion) {
    for n in [128, 256] {
        let (_, f) = data(n);
        modes(c, "nonlinearity", n, || {
            black_box(nonlinearity(black_box(&f)).unwrap());
        });
    }
}

fn steps(c: &mut Criterion) {
    for n in [128, 256] {
        let (g, f) = data(n);
        let dt = cfl_dt(&g, 1.0);
        modes(c, "if_rk4_step", n, || {
            let mut st = Stepper::new(f.clone(), dt).unwrap();
            st.step().unwrap();
            black_box(st.field());
        });
    }
}

fn norms(c: &mut Criterion) {
    let (_, f) = data(256);
    modes(c, "gevrey_norm", 256, || {
        black_box(gevrey_norm(black_box(&f), 0.5, 0.1).unwrap());
    });
    let (g, f) = data(32);
    let w = SpaceTimeField::from_fn(g, 4.0 / 64.0, 64, |_, t| Ok(semigroup_apply(&f, t))).unwrap();
    modes(c, "bourgain_norm", 32, || {
        black_box(bourgain_norm(black_box(&w), &GevreyParams::default()).unwrap());
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(20);
    targets = transforms, products, steps, norms
}
criterion_main!(kernels);
