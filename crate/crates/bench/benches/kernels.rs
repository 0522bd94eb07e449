use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qtemplate_bench::fixture;
use qtemplate_core::circuit::{grover_oracle, grover_step, qft_2d, FilterSpec};
use qtemplate_core::glyphs::RECOMMENDED_K_MAX;
use qtemplate_core::optics::compose_optical_qft;
use qtemplate_core::pipeline::{run_match, sweep_noise, MatchOptions, Pair, RECOGNITION_DIRECTION};
use qtemplate_core::StateVector;

fn gates(c: &mut Criterion) {
    let mut group = c.benchmark_group("gates");
    group.sample_size(20);
    let base = StateVector::uniform(18).unwrap();
    group.bench_function("hadamard_all_18", |b| {
        b.iter_batched_ref(|| base.clone(), |s| s.apply_hadamard_all(), criterion::BatchSize::LargeInput)
    });
    group.bench_function("qft_2d_9x9", |b| {
        b.iter_batched_ref(
            || base.clone(),
            |s| qft_2d(s, 9, 9).unwrap(),
            criterion::BatchSize::LargeInput,
        )
    });
    let template = fixture("A_512.pbm");
    let oracle = grover_oracle(&template).unwrap();
    group.bench_function("grover_step_512", |b| {
        b.iter_batched_ref(
            || base.clone(),
            |s| grover_step(s, &oracle, RECOGNITION_DIRECTION).unwrap(),
            criterion::BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    let a = fixture("A_512.pbm");
    let filtered = MatchOptions::filtered(FilterSpec::sharp_cutoff(RECOMMENDED_K_MAX));
    group.bench_function("match_512_filtered", |b| {
        b.iter(|| run_match(black_box(&a), black_box(&a), &filtered).unwrap())
    });
    let a32 = fixture("A_32.pbm");
    let b32 = fixture("B_32.pbm");
    let pair = Pair::new(&a32, &b32);
    group.bench_function("sweep_cell_32_x10", |b| {
        b.iter(|| sweep_noise(pair, pair, &[0.1], 10, 0, &filtered).unwrap())
    });
    group.finish();
}

fn optics(c: &mut Criterion) {
    c.bench_function("optical_qft_6", |b| b.iter(|| compose_optical_qft(black_box(6), true).unwrap()));
}

criterion_group!(benches, gates, pipeline, optics);
criterion_main!(benches);
