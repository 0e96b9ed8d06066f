use std::hint::black_box;

use coringlab::{verify, Instance, Options};
use coringlab_core::instances::{Generator, DEFAULT_BUDGET};
use coringlab_core::par::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    for g in [Generator::Block, Generator::Corner(4), Generator::KgtDirectSum(vec![1, 2, 2])] {
        let inst = Instance::from_system(&g.build(2, DEFAULT_BUDGET).unwrap(), Some(&g));
        for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            let opts = Options {
                exec,
                ..Options::default()
            };
            group.bench_with_input(BenchmarkId::new(name, &g), &inst, |b, inst| {
                b.iter(|| black_box(verify(inst, &opts)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, suites);
criterion_main!(benches);
