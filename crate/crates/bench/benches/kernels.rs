use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use rvb_core::dmrm::{pair_correlations, rho2_columns, DmrmState, DEFAULT_ROW_WIDTH_CAP};
use rvb_core::ggm::ggm_restricted;
use rvb_core::lattice::{covering_count_transfer, enumerate_coverings};
use rvb_core::scaling::{fit_scaling, SampleFamily, ScalingSample, SearchKind};
use rvb_core::statevec::{build_rvb, partial_trace};
use rvb_core::LatticeSpec;

fn lattice(c: &mut Criterion) {
    let spec = LatticeSpec::open(4, 4).unwrap();
    c.bench_function("enumerate_coverings 4x4", |b| {
        b.iter(|| enumerate_coverings(black_box(&spec)).unwrap())
    });
    let tall = LatticeSpec::open(12, 12).unwrap();
    c.bench_function("covering_count_transfer 12x12", |b| {
        b.iter(|| covering_count_transfer(black_box(&tall)).unwrap())
    });
}

fn statevec(c: &mut Criterion) {
    let spec = LatticeSpec::periodic(4, 4).unwrap();
    c.bench_function("build_rvb 4x4 ph", |b| b.iter(|| build_rvb(black_box(&spec)).unwrap()));
    let psi = build_rvb(&spec).unwrap();
    let keep: Vec<usize> = (0..8).collect();
    c.bench_function("partial_trace 8 of 16", |b| {
        b.iter(|| partial_trace(black_box(&psi), &keep).unwrap())
    });
}

fn dmrm(c: &mut Criterion) {
    let spec = LatticeSpec::periodic(6, 4).unwrap();
    c.bench_function("rho2_columns 6x4 ph", |b| {
        b.iter(|| rho2_columns(black_box(&spec), 0, 5).unwrap())
    });
    let wide = LatticeSpec::periodic(6, 6).unwrap();
    c.bench_function("pair_correlations 6x6 ph", |b| {
        b.iter(|| pair_correlations(black_box(&wide), DEFAULT_ROW_WIDTH_CAP).unwrap())
    });
    let mut group = c.benchmark_group("restricted");
    group.sample_size(10);
    group.bench_function("ggm_restricted 6x5 ph", |b| {
        b.iter_batched(
            || DmrmState::new(LatticeSpec::periodic(6, 5).unwrap()).unwrap(),
            |src| ggm_restricted(&src, &src.supported_families()).unwrap(),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn scaling(c: &mut Criterion) {
    let samples: Vec<ScalingSample> = [8usize, 16, 24, 36, 48, 64]
        .iter()
        .map(|&n| {
            let g = 0.358 + 1.77 * (n as f64).powf(-1.82);
            ScalingSample::new(n, g, SampleFamily::Perfect, SearchKind::Exhaustive)
        })
        .collect();
    c.bench_function("fit_scaling 6 points", |b| {
        b.iter(|| fit_scaling(black_box(&samples)).unwrap())
    });
}

criterion_group!(benches, lattice, statevec, dmrm, scaling);
criterion_main!(benches);
