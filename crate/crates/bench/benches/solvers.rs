use std::hint::black_box;

use cqed_core::fit::{lm_fit, FitData, FitModel, ModelKind};
use cqed_core::qdyn::{
    build_system, evolve, steady_state, DensityMatrix, HilbertConfig, Sampler, SystemParams,
};
use cqed_core::spectra::dit_transmission;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn driven() -> SystemParams {
    SystemParams { omega_drive: 0.5, delta_c: 0.3, ..SystemParams::new(1.0, 5.0, 0.3) }
}

fn bench_evolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve");
    for (n_max, n_em) in [(1, 1), (3, 1), (3, 2)] {
        let cfg = HilbertConfig::new(n_max, n_em).unwrap();
        let sys = build_system(cfg, &driven()).unwrap();
        let rho0 = DensityMatrix::basis(cfg.dim(), 0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(cfg.dim()), &sys, |b, sys| {
            b.iter(|| evolve(black_box(sys), &rho0, 5.0, &Sampler::Times(vec![5.0])).unwrap())
        });
    }
    group.finish();
}

fn bench_steady_state(c: &mut Criterion) {
    let mut group = c.benchmark_group("steady_state");
    for (n_max, n_em) in [(2, 1), (4, 1), (4, 2)] {
        let cfg = HilbertConfig::new(n_max, n_em).unwrap();
        let sys = build_system(cfg, &driven()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(cfg.dim()), &sys, |b, sys| {
            b.iter(|| steady_state(black_box(sys)).unwrap())
        });
    }
    group.finish();
}

fn bench_lm_fit(c: &mut Criterion) {
    let x: Vec<f64> = (0..401).map(|k| -100.0 + 0.5 * k as f64).collect();
    let truth = SystemParams { delta_a: 1.0, ..SystemParams::new(4.9, 49.7, 1.36) };
    let y = dit_transmission(&truth, &x).unwrap().values().to_vec();
    let dit = FitModel::new(ModelKind::Dit, &[0.5, 1.3, 4.0, 45.0, 1.36, 0.95, 0.0, 1.0]).unwrap();
    c.bench_function("lm_fit/dit", |b| b.iter(|| lm_fit(black_box(&dit), FitData::new(&x, &y)).unwrap()));

    let t: Vec<f64> = (0..300).map(|k| 0.005 * k as f64).collect();
    let counts: Vec<f64> = t.iter().map(|t| 5e3 * (-t / 0.194).exp() + 2.0).collect();
    let decay = FitModel::new(ModelKind::ExpDecay, &[4e3, 0.25, 1.0, 0.0, 0.0]).unwrap();
    c.bench_function("lm_fit/exp_decay", |b| {
        b.iter(|| lm_fit(black_box(&decay), FitData::new(&t, &counts)).unwrap())
    });
}

criterion_group!(benches, bench_evolve, bench_steady_state, bench_lm_fit);
criterion_main!(benches);
