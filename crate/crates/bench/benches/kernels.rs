use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rdna_bench::{reference_chain, stacked_model};
use rdna_core::bsms::max_rate_loss;
use rdna_core::excess::rate_function;
use rdna_core::gauss::solve_realization;
use rdna_core::jscc::{design_feedback_scalar, simulate_scalar};
use rdna_core::math::perron_eigenvalue;
use rdna_core::{RngStream, SolverOptions};

fn realization(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_realization");
    for k in [1usize, 2, 4] {
        let model = stacked_model(k);
        g.bench_with_input(BenchmarkId::from_parameter(2 * k), &model, |b, m| {
            b.iter(|| solve_realization(m, black_box(0.8 * k as f64), None, &SolverOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn bsms(c: &mut Criterion) {
    c.bench_function("max_rate_loss", |b| b.iter(max_rate_loss));
    let chain = reference_chain();
    c.bench_function("perron_eigenvalue_4x4", |b| b.iter(|| perron_eigenvalue(black_box(&chain.transition)).unwrap()));
    c.bench_function("rate_function", |b| b.iter(|| rate_function(&chain, black_box(0.2)).unwrap()));
}

fn simulation(c: &mut Criterion) {
    let design = design_feedback_scalar(0.5, 1.0, 1.0, 1.0).unwrap();
    let mut g = c.benchmark_group("simulate_scalar");
    g.sample_size(10);
    g.bench_function("fb_1e5", |b| b.iter(|| simulate_scalar(&design, 100_000, RngStream::new(1, 0)).unwrap()));
    g.finish();
}

criterion_group!(benches, realization, bsms, simulation);
criterion_main!(benches);
