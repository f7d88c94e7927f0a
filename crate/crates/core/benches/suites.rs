use criterion::{criterion_group, criterion_main, Criterion};

use wtg_core::verify::{fixture, suite_cz_cnz, suite_reduction, SuiteOptions};

fn opts(jobs: usize) -> SuiteOptions {
    SuiteOptions {
        jobs,
        random_samples: 10,
        ..SuiteOptions::default()
    }
}

// jobs = 1 takes the sequential path; jobs = 0 hands the pairings to rayon
// when the `parallel` feature is on and falls back to sequential otherwise.
fn reduction(c: &mut Criterion) {
    let mut g = c.benchmark_group("reduction");
    g.sample_size(10);
    for name in ["inc-test-dec-halt", "loop"] {
        let f = fixture(name).expect("bundled fixture");
        g.bench_function(format!("{name}/sequential"), |b| {
            b.iter(|| suite_reduction(&f, &opts(1)))
        });
        g.bench_function(format!("{name}/parallel"), |b| {
            b.iter(|| suite_reduction(&f, &opts(0)))
        });
    }
    g.finish();
}

fn controls(c: &mut Criterion) {
    let mut g = c.benchmark_group("cz");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| suite_cz_cnz(&opts(1))));
    g.bench_function("parallel", |b| b.iter(|| suite_cz_cnz(&opts(0))));
    g.finish();
}

criterion_group!(benches, reduction, controls);
criterion_main!(benches);
