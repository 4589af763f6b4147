//! Sequential against parallel execution on the workloads that fan out.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ppot_core::graph::{ball_profile, build_lattice, build_tree, GeneratorLimits};
use ppot_core::green::{parabolicity_probe, SolverOptions};
use ppot_core::report::{run_report, ReportConfig};
use ppot_core::verify::{hardy_suite, picone_suite, SuiteOptions};
use ppot_core::{ExecMode, ExponentParams};

const MODES: [(&str, ExecMode); 2] = [
    ("sequential", ExecMode::Sequential),
    ("parallel", ExecMode::Parallel),
];

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suites");
    group.sample_size(10);
    for (name, mode) in MODES {
        let options = SuiteOptions::new(200_000, 1).with_mode(mode);
        group.bench_with_input(BenchmarkId::new("picone", name), &options, |b, o| {
            b.iter(|| black_box(picone_suite(o).unwrap()))
        });
        let options = SuiteOptions::new(20_000, 1).with_mode(mode);
        group.bench_with_input(BenchmarkId::new("hardy", name), &options, |b, o| {
            b.iter(|| black_box(hardy_suite(o).unwrap()))
        });
    }
    group.finish();
}

fn radius_ladder(c: &mut Criterion) {
    let lattice = build_lattice(2, 40, GeneratorLimits::default()).unwrap();
    let profile = ball_profile(&lattice);
    let radii: Vec<usize> = (4..=36).step_by(4).collect();
    let tree = build_tree(2, 10, GeneratorLimits::default()).unwrap();
    let params = ExponentParams::new(2.5, 3.5).unwrap();

    let mut group = c.benchmark_group("ladder");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new("probe-square-lattice", name), |b| {
            b.iter(|| {
                black_box(
                    parabolicity_probe(
                        &lattice,
                        &profile,
                        3.0,
                        &radii,
                        &SolverOptions::default(),
                        mode,
                    )
                    .unwrap(),
                )
            })
        });
        let mut config = ReportConfig::new(params, (1..=9).collect());
        config.mode = mode;
        group.bench_function(BenchmarkId::new("report-binary-tree", name), |b| {
            b.iter(|| black_box(run_report(&tree, &config).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, suites, radius_ladder);
criterion_main!(benches);
