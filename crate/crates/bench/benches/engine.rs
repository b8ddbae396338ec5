use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plate_dcm::benchmarks::CaseId;
use plate_dcm::Jet;
use plate_dcm_bench::fixture;
use std::hint::black_box;

fn jets(c: &mut Criterion) {
    let a = Jet::variable_x(0.3, 0.7) * 1.7 + Jet::variable_y(0.3, 0.7) * -0.4 + 0.1;
    c.bench_function("jet_mul", |b| b.iter(|| black_box(a) * black_box(a)));
    c.bench_function("jet_tanh", |b| b.iter(|| black_box(a).tanh()));
}

fn loss(c: &mut Criterion) {
    let mut group = c.benchmark_group("loss_and_gradient");
    group.sample_size(10);
    for (layers, neurons) in [(1, 20), (2, 50), (3, 50)] {
        let (loss, params) = fixture(CaseId::SsSquare, layers, neurons);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{layers}x{neurons}")), &params, |b, p| {
            b.iter(|| loss.evaluate(black_box(p)).expect("finite loss"))
        });
    }
    group.finish();

    let (loss, params) = fixture(CaseId::SsSquare, 3, 50);
    let mut group = c.benchmark_group("forward_only");
    group.sample_size(10);
    group.bench_function("3x50", |b| b.iter(|| loss.breakdown(black_box(&params)).expect("finite loss")));
    group.finish();
}

criterion_group!(benches, jets, loss);
criterion_main!(benches);
