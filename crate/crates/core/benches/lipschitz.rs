//! Grid Lipschitz estimate: rayon bands against the sequential loop.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use solvfill_core::filling::chain::TameCtx;
use solvfill_core::filling::estimate::{grid_max, Schedule};
use solvfill_core::filling::assemble::gromov_fill;
use solvfill_core::filling::probe::relation_word;
use solvfill_core::presets::load_preset;
use solvfill_core::words::NormalForms;
use solvfill_core::SolvableGroup;
use std::hint::black_box;

fn bench(c: &mut Criterion) {
    let g = SolvableGroup::new(load_preset("heisenberg-tame").unwrap()).unwrap();
    let nf = NormalForms::new(&g).unwrap();
    let ctx = TameCtx::for_tame_group(&nf).unwrap();
    let w = relation_word(&g, &ctx, 64).unwrap();
    let f = gromov_fill(&g, &ctx, g.identity_f64(), &w).unwrap().map;
    let mut group = c.benchmark_group("grid_max");
    group.sample_size(10);
    for n in [128, 256] {
        for (name, s) in [("auto", Schedule::Auto), ("sequential", Schedule::Sequential)] {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| b.iter(|| grid_max(&g, black_box(&f), n, s)));
        }
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
