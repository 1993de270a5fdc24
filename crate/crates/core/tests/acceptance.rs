// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --release --test acceptance -- 1 2`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinstar_core::hilbert::{herm_eig, partial_trace, trace_distance, DensityMatrix, Operator, PureState, C64};
use spinstar_core::nonmarkov::nm_window_curve_with;
use spinstar_core::sweep::{run_grid, run_nm_family, SweepRecord, SweepSpec};
use spinstar_core::{
    blp_measure, evolve, find_matched_coupling, fidelity_gradient, optimize, state_fidelity, target_state,
    ControlProtocol, CouplingMode, OptimizationConfig, Representation, SpinStarModel, SpinStarSystem, TargetKind,
};

const T: f64 = 10.0;
const SAMPLES: usize = 2000;

struct Check {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Check {
    Check {
        ok,
        detail: detail.into(),
    }
}

fn anchor_a() -> SpinStarModel {
    SpinStarModel::new(2, 8, 0.2).unwrap().scaled()
}

fn criterion_1() -> Vec<Check> {
    let nm = blp_measure(&anchor_a(), T, SAMPLES).unwrap().value;
    let full = anchor_a().with_representation(Representation::Full);
    let nm_full = blp_measure(&full, T, SAMPLES).unwrap().value;
    vec![
        check((nm - 0.43).abs() <= 0.03, format!("NM(n=8, A=0.2/sqrt6) = {nm:.6}, expected 0.43 +- 0.03")),
        check(
            (nm - nm_full).abs() < 1e-9,
            format!("full 256-dim register agrees: {nm_full:.12} vs {nm:.12}"),
        ),
    ]
}

fn criterion_2() -> Vec<Check> {
    let b = SpinStarModel::new(2, 5, 0.1466).unwrap();
    let nm_b = blp_measure(&b, T, SAMPLES).unwrap().value;
    let nm_a = blp_measure(&anchor_a(), T, SAMPLES).unwrap().value;
    let a = find_matched_coupling(2, 5, nm_a, T, (0.1, 0.2)).unwrap();
    let recheck = blp_measure(&SpinStarModel::new(2, 5, a).unwrap(), T, SAMPLES).unwrap().value;
    vec![
        check((nm_b - 0.43).abs() <= 0.03, format!("NM(n=5, A=0.1466) = {nm_b:.6}, expected 0.43 +- 0.03")),
        check(
            (a - 0.1466).abs() <= 0.005,
            format!("matched coupling at n=5: {a:.6}, expected 0.1466 +- 0.005"),
        ),
        check(
            (recheck - nm_a).abs() < 5e-3,
            format!("matched NM recheck |{recheck:.6} - {nm_a:.6}| < 5e-3"),
        ),
    ]
}

/// max over product pure states of |<target|a (x) b>|^2, on a Bloch-angle grid.
fn product_state_cap(target: &PureState, steps: usize) -> f64 {
    let t = target.amplitudes();
    let local = |theta: f64, phi: f64| [C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)];
    let angles: Vec<(f64, f64)> = (0..=steps)
        .flat_map(|i| {
            (0..steps).map(move |j| {
                (
                    std::f64::consts::PI * i as f64 / steps as f64,
                    2.0 * std::f64::consts::PI * j as f64 / steps as f64,
                )
            })
        })
        .collect();
    let mut best: f64 = 0.0;
    for &(ta, pa) in &angles {
        let a = local(ta, pa);
        for &(tb, pb) in &angles {
            let b = local(tb, pb);
            let ov = t[0].conj() * a[0] * b[0] + t[1].conj() * a[0] * b[1] + t[2].conj() * a[1] * b[0] + t[3].conj() * a[1] * b[1];
            best = best.max(ov.norm_sqr());
        }
    }
    best
}

fn criterion_3() -> Vec<Check> {
    let target = target_state(TargetKind::Bell, 2).unwrap();
    let cap = product_state_cap(&target, 48);
    let mut checks = vec![check(
        (cap - 0.5).abs() < 1e-3 && cap <= 0.5 + 1e-12,
        format!("brute-force product-state Bell overlap cap = {cap:.9}"),
    )];
    for n in [3, 4, 5] {
        let model = SpinStarModel::new(2, n, 0.0).unwrap();
        let nm = blp_measure(&model, T, SAMPLES).unwrap().value;
        let r = optimize(&model, &target, T, &OptimizationConfig::default()).unwrap();
        checks.push(check(
            r.best_fidelity <= 0.5 + 1e-6 && r.best_fidelity <= cap + 1e-6 && nm.abs() <= 1e-9,
            format!("A=0, n={n}: optimized F = {:.12}, NM = {nm:.2e}", r.best_fidelity),
        ));
    }
    checks
}

fn criterion_4() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(20260101);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut worst_cfg = String::new();
    for _ in 0..20 {
        let m = rng.gen_range(2..=3);
        let n = rng.gen_range(m + 1..=5);
        let mode = if rng.gen_bool(0.5) { CouplingMode::Scaled } else { CouplingMode::Unscaled };
        let model = SpinStarModel::new(m, n, rng.gen_range(0.0..0.3)).unwrap().with_mode(mode);
        let kinds: &[TargetKind] = if m == 2 { &[TargetKind::Bell, TargetKind::Ghz, TargetKind::W] } else { &[TargetKind::Ghz, TargetKind::W] };
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let target = target_state(kind, m).unwrap();
        let total = rng.gen_range(1.0..10.0);
        let amps: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = ControlProtocol::new(total, amps.clone()).unwrap();
        let grad = fidelity_gradient(&p, &model, &target).unwrap();
        for k in 0..20 {
            let shifted = |d: f64| {
                let mut a = amps.clone();
                a[k] += d;
                state_fidelity(&ControlProtocol::new(total, a).unwrap(), &model, &target).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let rel = (grad[k] - fd).abs() / fd.abs().max(grad[k].abs());
            if rel > worst {
                worst = rel;
                worst_cfg = format!("m={m} n={n} A={:.3} {mode} {kind} k={k} grad={:.3e} fd={fd:.3e}", model.coupling, grad[k]);
            }
        }
    }
    vec![check(
        worst < 1e-5,
        format!("20 configs x 20 slices: max relative error {worst:.2e} ({worst_cfg})"),
    )]
}

/// Spearman correlation with average ranks for ties.
fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn family_records() -> Vec<SweepRecord> {
    let out = run_nm_family(&SweepSpec::nm_family_desk()).unwrap();
    assert!(out.failures.is_empty(), "family failures: {:?}", out.failures);
    out.records
}

fn criteria_5_6(records: &[SweepRecord]) -> (Vec<Check>, Vec<Check>) {
    for r in records {
        println!(
            "    n={} A={:.3} NM={:.5} F={:.5} iters={} {:.1}s",
            r.n, r.coupling, r.nm, r.fidelity, r.iterations, r.wall_time_s
        );
    }
    let nm: Vec<f64> = records.iter().map(|r| r.nm).collect();
    let f: Vec<f64> = records.iter().map(|r| r.fidelity).collect();
    let rho = spearman(&nm, &f);
    let c5 = vec![check(
        records.len() >= 12 && rho > 0.8,
        format!("Spearman(NM, F) = {rho:.4} over {} configurations", records.len()),
    )];

    let mut pairs = 0;
    let mut worst = (0.0, String::new());
    for i in 0..records.len() {
        for j in i + 1..records.len() {
            let (a, b) = (&records[i], &records[j]);
            if (a.nm - b.nm).abs() < 0.02 {
                pairs += 1;
                let df = (a.fidelity - b.fidelity).abs();
                if df >= worst.0 {
                    worst = (
                        df,
                        format!("(n={}, A={}) vs (n={}, A={}): dNM={:.4}", a.n, a.coupling, b.n, b.coupling, (a.nm - b.nm).abs()),
                    );
                }
            }
        }
    }
    let c6 = vec![check(
        worst.0 < 0.05,
        format!("{pairs} pairs with |dNM| < 0.02, max |dF| = {:.4} {}", worst.0, worst.1),
    )];
    (c5, c6)
}

fn criterion_7() -> Vec<Check> {
    let mut spec = SweepSpec::grid();
    spec.optimization.restarts = 3;
    let out = run_grid(&spec).unwrap();
    let nt = spec.times.len();
    let argmax = |key: fn(&SweepRecord) -> f64| {
        let mut best = 0;
        for (i, r) in out.records.iter().enumerate() {
            if key(r) > key(&out.records[best]) {
                best = i;
            }
        }
        (best / nt, best % nt)
    };
    for r in &out.records {
        println!("    A={:.2} T={:.1} NM={:.5} F={:.5}", r.coupling, r.total_time, r.nm, r.fidelity);
    }
    let (a_nm, t_nm) = argmax(|r| r.nm);
    let (a_f, t_f) = argmax(|r| r.fidelity);
    let dist = a_nm.abs_diff(a_f).max(t_nm.abs_diff(t_f));
    vec![check(
        out.failures.is_empty() && dist <= 1,
        format!("max-NM cell (A_{a_nm}, T_{t_nm}), max-F cell (A_{a_f}, T_{t_f}), Chebyshev distance {dist}"),
    )]
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> Operator {
    let mut entries = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in i..d {
            let z = if i == j {
                C64::new(rng.gen_range(-1.0..1.0), 0.0)
            } else {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            };
            entries[i * d + j] = z;
            entries[j * d + i] = z.conj();
        }
    }
    Operator::from_row_major(d, &entries).unwrap()
}

fn random_pure(rng: &mut ChaCha8Rng, d: usize) -> PureState {
    let amps: Vec<C64> = (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    PureState::normalized(amps).unwrap()
}

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let k = rng.gen_range(1..=d);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = Operator::zeros(d);
    for w in weights {
        let psi = random_pure(rng, d);
        acc = &acc + &Operator::from_matrix(psi.density().matrix().clone()).unwrap().scale(w / total);
    }
    DensityMatrix::from_matrix(acc.into_matrix()).unwrap()
}

fn criterion_8() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checks = Vec::new();

    let mut unit = 0.0f64;
    for d in [2, 5, 8, 16, 24] {
        for _ in 0..5 {
            let h = random_hermitian(&mut rng, d);
            let u = herm_eig(&h).unwrap().propagator(rng.gen_range(0.1..5.0));
            unit = unit.max(u.unitarity_error());
        }
    }
    checks.push(check(unit < 1e-12, format!("unitarity: max |U^H U - I| = {unit:.1e}")));

    let mut drift = 0.0f64;
    for (m, n) in [(2, 4), (3, 6)] {
        let model = SpinStarModel::new(m, n, 0.17).unwrap();
        let sys = SpinStarSystem::new(&model).unwrap();
        let amps: Vec<f64> = (0..200).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let traj = evolve(&sys.h0, &sys.hc, &ControlProtocol::new(T, amps).unwrap(), &sys.psi_plus).unwrap();
        for s in &traj.states {
            drift = drift.max((s.norm() - 1.0).abs());
        }
    }
    checks.push(check(drift < 1e-12, format!("norm conservation over 200 slices: max drift {drift:.1e}")));

    let mut slack = f64::NEG_INFINITY;
    for _ in 0..20 {
        let (a, b) = (random_density(&mut rng, 8), random_density(&mut rng, 8));
        let full = trace_distance(&a, &b).unwrap();
        for keep in [vec![0], vec![2], vec![0, 1], vec![2, 0]] {
            let red = trace_distance(&partial_trace(&a, 3, &keep).unwrap(), &partial_trace(&b, 3, &keep).unwrap()).unwrap();
            slack = slack.max(red - full);
        }
    }
    checks.push(check(slack <= 1e-12, format!("partial-trace contractivity: max D_red - D = {slack:.1e}")));

    let mut metric_ok = true;
    for _ in 0..20 {
        let (a, b, c) = (random_density(&mut rng, 4), random_density(&mut rng, 4), random_density(&mut rng, 4));
        let dab = trace_distance(&a, &b).unwrap();
        metric_ok &= trace_distance(&a, &a).unwrap() < 1e-12;
        metric_ok &= (dab - trace_distance(&b, &a).unwrap()).abs() < 1e-12;
        metric_ok &= (0.0..=1.0).contains(&dab);
        metric_ok &= dab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12;
    }
    checks.push(check(metric_ok, "trace-distance metric axioms on 20 random triples"));

    let model = SpinStarModel::new(2, 5, 0.1466).unwrap();
    let curve = nm_window_curve_with(&model, T, 10, SAMPLES).unwrap();
    let monotone = curve.windows(2).all(|w| w[1].1 >= w[0].1);
    let direct = blp_measure(&model, curve[4].0, SAMPLES / 2).unwrap().value;
    checks.push(check(
        monotone && (direct - curve[4].1).abs() < 1e-12,
        format!("NM window curve non-decreasing; NM(T/2) = {direct:.9} vs curve {:.9}", curve[4].1),
    ));

    let mut worst = 0.0f64;
    for model in [anchor_a(), model.clone(), SpinStarModel::new(2, 4, 0.2).unwrap()] {
        let a = blp_measure(&model, T, 2000).unwrap().value;
        let b = blp_measure(&model, T, 4000).unwrap().value;
        worst = worst.max((a - b).abs());
    }
    checks.push(check(worst < 1e-3, format!("sampling doubling 2000 -> 4000: max |dNM| = {worst:.2e}")));

    let mut spec = SweepSpec::grid();
    spec.m = 2;
    spec.n = 4;
    spec.target = TargetKind::Bell;
    spec.couplings = vec![0.05, 0.2];
    spec.times = vec![3.0, 6.0];
    spec.nm_samples = 400;
    spec.optimization.restarts = 2;
    spec.optimization.max_iters = 20;
    spec.optimization.slices = 40;
    let strip = |recs: &[SweepRecord]| recs.iter().map(SweepRecord::without_timing).collect::<Vec<_>>();
    let first = strip(&run_grid(&spec).unwrap().records);
    let again = strip(&run_grid(&spec).unwrap().records);
    spec.parallelism = 8;
    let parallel = strip(&run_grid(&spec).unwrap().records);
    checks.push(check(
        first.len() == 4 && first == again && first == parallel,
        "sweep determinism and parallelism 1 vs 8 equivalence",
    ));
    checks
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |k: u32| selected.is_empty() || selected.contains(&k);
    let mut results: Vec<(u32, Vec<Check>, f64)> = Vec::new();
    let timed = |k: u32, f: &dyn Fn() -> Vec<Check>, results: &mut Vec<(u32, Vec<Check>, f64)>| {
        if want(k) {
            let start = Instant::now();
            let c = f();
            results.push((k, c, start.elapsed().as_secs_f64()));
        }
    };
    timed(1, &criterion_1, &mut results);
    timed(2, &criterion_2, &mut results);
    timed(3, &criterion_3, &mut results);
    timed(4, &criterion_4, &mut results);
    if want(5) || want(6) {
        let start = Instant::now();
        let records = family_records();
        let (c5, c6) = criteria_5_6(&records);
        let secs = start.elapsed().as_secs_f64();
        if want(5) {
            results.push((5, c5, secs));
        }
        if want(6) {
            results.push((6, c6, 0.0));
        }
    }
    timed(7, &criterion_7, &mut results);
    timed(8, &criterion_8, &mut results);

    let mut failed = 0;
    println!();
    for (k, checks, secs) in &results {
        let ok = checks.iter().all(|c| c.ok);
        if !ok {
            failed += 1;
        }
        println!("{} criterion {k} ({secs:.1}s)", if ok { "PASS" } else { "FAIL" });
        for c in checks {
            println!("    [{}] {}", if c.ok { "ok" } else { "x" }, c.detail);
        }
    }
    println!("\n{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
