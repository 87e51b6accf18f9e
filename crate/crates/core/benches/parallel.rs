// SPDX-License-Identifier: Apache-2.0

//! Sequential versus rayon execution of the data-parallel kernels. Build
//! with `--no-default-features` to see the fallback path on both arms.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qutrit_noise::lindblad::DEFAULT_DEGENERACY_GUARD;
use qutrit_noise::model::{DensityMatrix3, SpinCenterParams};
use qutrit_noise::montecarlo::{
    ensemble_variance, stochastic_average_evolution, AveragingOptions, Dynamics, EnsembleSpec, OuFieldNoise, Source,
};
use qutrit_noise::noise::{MagneticDipoleNoise, Spectrum, SurfaceGeometry, SurfacePointChargeNoise};
use qutrit_noise::par::Execution;
use qutrit_noise::pipeline::rates_sweep;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_rates_sweep(c: &mut Criterion) {
    let p = SpinCenterParams::nv();
    let geom = SurfaceGeometry::new(5e-9, 0.0).unwrap();
    let charge = SurfacePointChargeNoise::new(geom, 1e15, 5e-9).unwrap();
    let bath = MagneticDipoleNoise::new(geom, 5e16, 0.24e-9, 0.0, 28e9).unwrap();
    let bz: Vec<f64> = (0..2001).map(|i| 0.2 * i as f64 / 2000.0).collect();
    let spectra = move |b: f64| -> qutrit_noise::Result<(Box<dyn Spectrum>, Box<dyn Spectrum>)> {
        Ok((Box::new(charge), Box::new(bath.tracking_field(b))))
    };
    let mut g = c.benchmark_group("rates_sweep_2001");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| rates_sweep(&p, black_box(&bz), DEFAULT_DEGENERACY_GUARD, exec, &spectra).unwrap())
        });
    }
    g.finish();
}

fn bench_ensemble_variance(c: &mut Criterion) {
    let z = 5e-9;
    let geom = SurfaceGeometry::new(z, 0.3).unwrap();
    let spec = EnsembleSpec {
        source: Source::elementary_charge(),
        dynamics: Dynamics::telegraph_with_tau(1e-8).unwrap(),
        n_areal: 1.0 / (z * z),
        side: 30.0 * z,
    };
    let mut g = c.benchmark_group("ensemble_variance_200");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| ensemble_variance(black_box(&spec), &geom, 1e-8, 32, 200, 3, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_stochastic(c: &mut Criterion) {
    let p = SpinCenterParams::new(0.2e6, 1.0e6, 1.0e6, 0.0035, 0.17, 0.085).unwrap();
    let noise = OuFieldNoise::new([3e9; 3], [0.0; 3], 1e-6).unwrap();
    let rho0 = DensityMatrix3::from_populations([0.0, 0.0, 1.0]).unwrap();
    let t = [0.0, 2e-5, 4e-5];
    let mut g = c.benchmark_group("stochastic_average_64");
    g.sample_size(10);
    for (name, exec) in MODES {
        let mut o = AveragingOptions::new(1e-6 / 16.0, 64, 5);
        o.bz = 0.08;
        o.execution = exec;
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| stochastic_average_evolution(&p, &noise, black_box(&rho0), &t, &o).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_rates_sweep, bench_ensemble_variance, bench_stochastic);
criterion_main!(benches);
