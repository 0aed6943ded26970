//! Sequential versus data-parallel execution of the hot kernels.
//!
//! Each group runs the same closure inside a one-thread rayon pool and inside
//! the default pool. Built with `--no-default-features` both variants take the
//! sequential path and should time the same.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracspec::assembly::{assemble_operator, CoefficientSpec, EllipticCoefficients, Mesh, OperatorKind};
use fracspec::fracops::{FractionalOrder, RayKind, RayOperator, Side};
use fracspec::geometry::{ConvexDomain, GridFunction, Point, RayGeometry};
use rayon::ThreadPoolBuilder;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("sequential", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn ray_operators(c: &mut Criterion) {
    let alpha = FractionalOrder::new(0.5).unwrap();
    let geom = Arc::new(RayGeometry::new(ConvexDomain::disk(0.5).unwrap(), Point::new(0.0, -0.5), 32, 256).unwrap());
    let f = GridFunction::from_real_fn(geom.clone(), |s| (3.0 * s.r).cos()).unwrap();
    let mut group = c.benchmark_group("ray_operator");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("build", name), |b| {
            b.iter(|| pool.install(|| RayOperator::build(geom.clone(), RayKind::Integral(Side::Left), alpha)))
        });
        let op = RayOperator::build(geom.clone(), RayKind::Kipriyanov, alpha);
        group.bench_function(BenchmarkId::new("apply", name), |b| b.iter(|| pool.install(|| op.apply(&f).unwrap())));
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let alpha = FractionalOrder::new(0.5).unwrap();
    let coeffs = EllipticCoefficients::new(
        CoefficientSpec::constant(1.0, Some(1.0)),
        Mesh::unit_box(32, Point::new(0.5, 0.0)).unwrap(),
        alpha,
    )
    .unwrap();
    let h = assemble_operator(OperatorKind::H, &coeffs).unwrap();
    let x: Vec<f64> = (0..h.dim()).map(|i| (i as f64).sin()).collect();
    let mut group = c.benchmark_group("assembly");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("operator_h", name), |b| {
            b.iter(|| pool.install(|| assemble_operator(OperatorKind::H, &coeffs).unwrap()))
        });
        group.bench_function(BenchmarkId::new("matvec", name), |b| b.iter(|| pool.install(|| h.apply(&x))));
    }
    group.finish();
}

criterion_group!(benches, ray_operators, assembly);
criterion_main!(benches);
