//! Sequential vs rayon execution of the sampling-heavy pipelines.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use paracr::curvature::Route;
use paracr::models::{flat_domain, si_family, verify_flat_structure_equations};
use paracr::par::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn structure_equations(c: &mut Criterion) {
    let mut g = c.benchmark_group("flat-structure-equations");
    g.sample_size(10);
    for (name, exec) in MODES {
        let dom = flat_domain(200, 42).tol_zero(1e-8).exec(exec);
        g.bench_with_input(BenchmarkId::from_parameter(name), &dom, |b, dom| {
            b.iter(|| verify_flat_structure_equations(dom).unwrap())
        });
    }
    g.finish();
}

fn kappa_curvature(c: &mut Criterion) {
    let si = si_family(1.0);
    let pts = si.metric_points(2000, 5);
    let mut g = c.benchmark_group("kappa-metric-curvature");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &pts, |b, pts| {
            b.iter(|| si.metric.curvature(pts, Route::Jet, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, structure_equations, kappa_curvature);
criterion_main!(benches);
