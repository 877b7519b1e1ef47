use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qeffect::effects::{factor_contraction, weak_atom_bound};
use qeffect::incompat::{
    binary_jointly_measurable, max_joint_lower_bound, DykstraOptions, LowerBoundOptions,
};
use qeffect::models::{cyclic_lattice, haversine_pair, HaversineMode};
use qeffect::numerics::{dft_matrix, real_vector};
use qeffect::observables::{
    coarse_grain, complementary_family, minimal_dilation, qubit_sharp_x, qubit_sharp_z,
};
use qeffect::{
    BinaryObservable, Contraction, Effect, HermitianMatrix, OutcomeFamily, TolerancePolicy,
};

fn pol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn order(c: &mut Criterion) {
    let mut g = c.benchmark_group("order");
    for n in [4usize, 16, 64] {
        let diag: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / (n + 1) as f64).collect();
        let e = Effect::from_diagonal(&diag).unwrap();
        let phi = real_vector(&vec![1.0 / (n as f64).sqrt(); n]);
        g.bench_with_input(BenchmarkId::new("weak_atom_bound", n), &n, |b, _| {
            b.iter(|| weak_atom_bound(black_box(&e), black_box(&phi)).unwrap())
        });
        let k = Contraction::new(dft_matrix(n).scale(0.9)).unwrap();
        let m = Contraction::new(
            (HermitianMatrix::from_diagonal(&diag).matrix() * k.matrix()).scale(0.5),
        )
        .unwrap();
        g.bench_with_input(BenchmarkId::new("factor_contraction", n), &n, |b, _| {
            b.iter(|| factor_contraction(black_box(&m), black_box(&k), &pol()).unwrap())
        });
    }
    g.finish();
}

fn complementarity(c: &mut Criterion) {
    let mut g = c.benchmark_group("complementarity");
    g.sample_size(10);
    for d in [5usize, 7, 11] {
        let l = cyclic_lattice(d).unwrap();
        let fam = OutcomeFamily::default_for(d);
        g.bench_with_input(BenchmarkId::new("lattice_family", d), &d, |b, _| {
            b.iter(|| complementary_family(&l.position, &l.momentum, &fam, &fam, &pol()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("minimal_dilation", d), &d, |b, _| {
            b.iter(|| minimal_dilation(black_box(&l.momentum), &pol()).unwrap())
        });
    }
    g.finish();
}

fn incompatibility(c: &mut Criterion) {
    let mut g = c.benchmark_group("incompatibility");
    g.sample_size(10);
    let mixed = |obs: &qeffect::DiscreteObservable, l: f64| {
        let e = coarse_grain(obs, &["+1"]).unwrap();
        let m = &(e.yes().matrix() * l) + &HermitianMatrix::scalar(2, 0.5 * (1.0 - l));
        BinaryObservable::new(Effect::from_matrix(m).unwrap())
    };
    for l in [0.6, 0.70, 0.75] {
        let (a, b) = (mixed(&qubit_sharp_z(), l), mixed(&qubit_sharp_x(), l));
        g.bench_with_input(BenchmarkId::new("binary_jm_qubit", l), &l, |bch, _| {
            bch.iter(|| {
                binary_jointly_measurable(&a, &b, &pol(), &DykstraOptions::default()).unwrap()
            })
        });
    }
    let pair = haversine_pair(32, HaversineMode::Compressed).unwrap();
    g.bench_function("max_joint_lower_bound_haversine_32", |b| {
        b.iter(|| {
            max_joint_lower_bound(&pair.e, &pair.f, &pol(), &LowerBoundOptions::default()).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, order, complementarity, incompatibility);
criterion_main!(benches);
