use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use explorer::engine::{run_replicates_seq, SimConfig};
use explorer::{AgentParams, GridWorld, Position, RefugeRect};

fn config() -> SimConfig {
    let world = GridWorld::new(20, 20, RefugeRect::new(0, 0, 4, 4), Position::new(1, 1)).unwrap();
    SimConfig::new(world, AgentParams::default())
}

fn replicates(c: &mut Criterion) {
    let config = config();
    let mut group = c.benchmark_group("replicates");
    group.sample_size(20);
    for n in [8u64, 32] {
        let seeds: Vec<u64> = (0..n).collect();
        group.bench_with_input(BenchmarkId::new("sequential", n), &seeds, |b, seeds| {
            b.iter(|| run_replicates_seq(black_box(&config), seeds).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &seeds, |b, seeds| {
            b.iter(|| explorer::engine::run_replicates_par(black_box(&config), seeds).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, replicates);
criterion_main!(benches);
