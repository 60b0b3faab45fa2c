use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qdtransfer::exec::Execution;
use qdtransfer::params::{DetuningGrid, ProtocolConfig};
use qdtransfer::protocol::{singlet_triplet_family, RunOptions};
use qdtransfer::spectra::{track_branches, TrackOptions};
use qdtransfer::sweep::inverse_speed_profile;
use qdtransfer::DeviceParams;

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn tracking(c: &mut Criterion) {
    let p = DeviceParams { t_c: 150.0, ..DeviceParams::default() };
    let family = singlet_triplet_family(&p);
    let grid = DetuningGrid { start: -2000.0, stop: 1500.0, step: 1.0 }.nodes();
    let mut g = c.benchmark_group("track_branches");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_function(name, |b| {
            b.iter(|| track_branches(black_box(&family), &grid, TrackOptions { exec, ..TrackOptions::default() }))
        });
    }
    g.finish();

    let trace = track_branches(&family, &grid, TrackOptions::default()).expect("trace");
    let mut g = c.benchmark_group("inverse_speed_profile");
    for (name, exec) in modes() {
        g.bench_function(name, |b| b.iter(|| inverse_speed_profile(black_box(&trace), 0, 0.01, p.hbar, exec)));
    }
    g.finish();
}

fn full_run(c: &mut Criterion) {
    let p = DeviceParams { t_c: 150.0, ..DeviceParams::default() };
    let cfg = ProtocolConfig::singlet_triplet();
    let mut g = c.benchmark_group("singlet_triplet_run");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_function(name, |b| b.iter(|| qdtransfer::protocol::run_with(&p, black_box(&cfg), RunOptions { exec })));
    }
    g.finish();
}

criterion_group!(benches, tracking, full_run);
criterion_main!(benches);
