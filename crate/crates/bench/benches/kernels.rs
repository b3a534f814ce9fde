use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ultraflow::flows::Stepper;
use ultraflow::{figure1_rows, to_spectral, FlowConfig, FlowKind, GridFn, Quadrature, UltraParams};

fn quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("quadrature_build");
    for nodes in [32usize, 64, 128] {
        g.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, &nodes| {
            b.iter(|| Quadrature::plain(black_box(2.7), nodes).unwrap())
        });
    }
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("to_spectral");
    for nodes in [32usize, 64, 128] {
        let q = Quadrature::plain(2.7, nodes).unwrap();
        q.basis();
        let f = GridFn::sample(&q, |z| (1.5 * z).exp());
        g.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, _| {
            b.iter(|| to_spectral(black_box(&f), &q, None).unwrap())
        });
    }
    g.finish();
}

fn flow_step(c: &mut Criterion) {
    let prm = UltraParams::new(4.0, 3.8).unwrap().with_beta(2.0).unwrap();
    let cfg = FlowConfig::new(FlowKind::Nonlinear, prm).unwrap();
    let mut g = c.benchmark_group("nonlinear_advance_1e-3");
    for nodes in [32usize, 64] {
        let q = Quadrature::plain(4.0, nodes).unwrap();
        let u0 = GridFn::sample(&q, |z| 1.0 + 0.05 * z * z);
        g.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, _| {
            b.iter(|| {
                let mut s = Stepper::new(&u0, &q, &cfg).unwrap();
                s.advance_to(1e-3).unwrap();
                black_box(s.u())
            })
        });
    }
    g.finish();
}

fn admissibility_sweep(c: &mut Criterion) {
    c.bench_function("figure1_rows_1000", |b| {
        b.iter(|| figure1_rows(black_box(3.0), 1.05, 6.0, 1000).unwrap())
    });
}

criterion_group!(benches, quadrature, transforms, flow_step, admissibility_sweep);
criterion_main!(benches);
