// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use spinstar_core::{
    blp_measure, fidelity_gradient, herm_eig, state_fidelity, target_state, ControlProtocol, Representation,
    SpinStarModel, SpinStarSystem, TargetKind,
};

fn slice_hamiltonians(c: &mut Criterion) {
    let mut group = c.benchmark_group("herm_eig");
    for (m, n) in [(2, 4), (2, 6), (3, 5), (2, 8)] {
        let sys = SpinStarSystem::new(&SpinStarModel::new(m, n, 0.15).unwrap()).unwrap();
        let h = &sys.h0 + &sys.hc.scale(0.4);
        group.bench_with_input(BenchmarkId::from_parameter(format!("dim{}", h.dim())), &h, |b, h| {
            b.iter(|| herm_eig(black_box(h)).unwrap())
        });
    }
    group.finish();
}

fn nm_measure(c: &mut Criterion) {
    let mut group = c.benchmark_group("blp_measure");
    group.sample_size(10);
    let anchor = SpinStarModel::new(2, 8, 0.2).unwrap().scaled();
    group.bench_function("collective n=8", |b| b.iter(|| blp_measure(black_box(&anchor), 10.0, 2000).unwrap()));
    let full = SpinStarModel::new(2, 5, 0.1466)
        .unwrap()
        .with_representation(Representation::Full);
    group.bench_function("full n=5", |b| b.iter(|| blp_measure(black_box(&full), 10.0, 2000).unwrap()));
    group.finish();
}

fn grape(c: &mut Criterion) {
    let mut group = c.benchmark_group("grape");
    group.sample_size(20);
    let model = SpinStarModel::new(2, 4, 0.1).unwrap();
    let target = target_state(TargetKind::Bell, 2).unwrap();
    let amps: Vec<f64> = (0..200).map(|k| (k as f64 * 0.37).sin()).collect();
    let p = ControlProtocol::new(10.0, amps).unwrap();
    group.bench_function("fidelity K=200", |b| b.iter(|| state_fidelity(black_box(&p), &model, &target).unwrap()));
    group.bench_function("gradient K=200", |b| b.iter(|| fidelity_gradient(black_box(&p), &model, &target).unwrap()));
    group.finish();
}

criterion_group!(benches, slice_hamiltonians, nm_measure, grape);
criterion_main!(benches);
