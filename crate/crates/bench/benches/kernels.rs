use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fluctlab::ensembles::{eigenvalues, sample_gue};
use fluctlab::moments::enumerate_pairings;
use fluctlab::quadrature::rho_via_contour;
use fluctlab::transforms::g2_gue_free;
use fluctlab::{AnalyticFunction, Contour, RngStream};

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigenvalues");
    for n in [64, 128, 256] {
        let x = sample_gue(n, RngStream::new(7, 0)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| eigenvalues(black_box(x)).unwrap())
        });
    }
    group.finish();
}

fn contour(c: &mut Criterion) {
    let f = AnalyticFunction::sin();
    let g = AnalyticFunction::exp();
    let mut group = c.benchmark_group("rho_via_contour");
    for nodes in [64, 256] {
        let cz = Contour::circle(0.0, 3.0, nodes, 2.0).unwrap();
        let cw = Contour::circle(0.0, 4.0, nodes, 2.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, _| {
            b.iter(|| rho_via_contour(&f, &g, g2_gue_free, &cz, &cw).unwrap())
        });
    }
    group.finish();
}

fn pairings(c: &mut Criterion) {
    c.bench_function("pairings/6+6", |b| {
        b.iter(|| {
            let mut connecting = 0usize;
            enumerate_pairings(black_box(6), 6)
                .unwrap()
                .for_each_ref(|p| connecting += p.connects(6) as usize);
            connecting
        })
    });
}

criterion_group!(benches, eigen, contour, pairings);
criterion_main!(benches);
