use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qps_bench::{fixture, DIMS};
use qps_core::{phase_fn, reconstruct_rho, reconstruct_wigner, teleport, BellLabel, OrderParam, PhaseSpace};

fn basis(c: &mut Criterion) {
    let mut g = c.benchmark_group("t_basis");
    for n in DIMS {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| PhaseSpace::with_n(n).unwrap().t_basis(OrderParam::W))
        });
    }
    g.finish();
}

fn quasiprob(c: &mut Criterion) {
    let mut g = c.benchmark_group("phase_fn_roundtrip");
    for n in DIMS {
        let (ps, rho) = fixture(n);
        ps.t_basis(OrderParam::H);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| reconstruct_rho(&ps, &phase_fn(&ps, &rho, OrderParam::H).unwrap()).unwrap())
        });
    }
    g.finish();
}

fn tomography(c: &mut Criterion) {
    let mut g = c.benchmark_group("reconstruct_wigner");
    for n in [5, 11] {
        let (ps, rho) = fixture(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| reconstruct_wigner(&ps, &rho, None).unwrap())
        });
    }
    g.finish();
}

fn teleportation(c: &mut Criterion) {
    let mut g = c.benchmark_group("teleport");
    g.sample_size(10);
    for n in [3, 5] {
        let (ps, rho) = fixture(n);
        let outcome = BellLabel::new(1, -1, ps.dim());
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| teleport(&ps, &rho, outcome, OrderParam::W, OrderParam::W).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, basis, quasiprob, tomography, teleportation);
criterion_main!(benches);
