use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use netcomp_core::admm::{encode_for_network, AdmmConfig};
use netcomp_core::codec::ReferenceCodec;
use netcomp_core::corpus::synthetic_corpus;
use netcomp_core::ensemble::DegradationEnsemble;
use netcomp_core::operators::{gaussian_kernel, BlurOperator, BoundaryMode};

fn display_ensemble() -> DegradationEnsemble {
    let mk = |s| BlurOperator::new(gaussian_kernel(15, s).unwrap(), BoundaryMode::Periodic);
    DegradationEnsemble::from_pairs([(mk(0.6), 0.6), (mk(0.8), 0.3), (mk(1.0), 0.1)]).unwrap()
}

fn bench_pipeline(c: &mut Criterion) {
    let codec = ReferenceCodec::new();
    let ensemble = display_ensemble();
    let mut group = c.benchmark_group("encode_for_network");
    group.sample_size(10);
    for size in [64usize, 128] {
        let (_, x) = synthetic_corpus(1, size, size).remove(0);
        group.bench_with_input(BenchmarkId::new("qp16_10iters", size), &x, |b, x| {
            let mut cfg = AdmmConfig::with_auto_beta(16);
            cfg.max_iterations = 10;
            cfg.convergence_epsilon = 1e-12;
            b.iter(|| encode_for_network(black_box(x), &ensemble, &codec, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
