use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::{Complex, DVector};
use renorm_core::fock::{build_hamiltonian, FockBasis};
use renorm_core::numerics::{dpr1_eig, QuadratureSpec};
use renorm_core::rankone::power;
use renorm_core::{Exponent, Method, RankOneOp};

fn instance(n: usize) -> (Vec<f64>, Vec<f64>) {
    let a = (0..n).map(|i| 1.0 + i as f64 * 0.37 + (i as f64).sqrt()).collect();
    let psi = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
    (a, psi)
}

fn secular(c: &mut Criterion) {
    let mut group = c.benchmark_group("dpr1");
    for n in [64, 256, 1024] {
        let (a, psi) = instance(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| dpr1_eig(black_box(&a), black_box(&psi), 0.8).unwrap())
        });
    }
    group.finish();
}

fn powers(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let mut group = c.benchmark_group("power_half");
    for n in [16, 64] {
        let (a, psi) = instance(n);
        let op = RankOneOp::new(DVector::from_vec(a), DVector::from_vec(psi), 0.8).unwrap();
        group.bench_with_input(BenchmarkId::new("quadrature", n), &op, |b, op| {
            b.iter(|| power(op, Exponent::Half, Method::Quadrature, &spec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("eig", n), &op, |b, op| {
            b.iter(|| power(op, Exponent::Half, Method::Eig, &spec).unwrap())
        });
    }
    group.finish();
}

fn fock(c: &mut Criterion) {
    let basis = FockBasis::new(3, 8).unwrap();
    let omega = [1.0, 1.5, 2.2];
    let f: Vec<_> = [0.3, 0.2, 0.1].iter().map(|&x| Complex::new(x, 0.0)).collect();
    c.bench_function("fock_hamiltonian_3x8", |b| {
        b.iter(|| build_hamiltonian(&basis, black_box(&omega), &f, 0.2).unwrap())
    });
}

criterion_group!(benches, secular, powers, fock);
criterion_main!(benches);
