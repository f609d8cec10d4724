//! Sequential against rayon-parallel execution of the main sample sweeps.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use twotoda::algebra::{build_gl, build_sl};
use twotoda::checks::{self, CheckConfig};
use twotoda::{AlgebraSpec, BracketKind, Exec, PhaseSpace, PoissonEngine};

fn algebras() -> Vec<Arc<AlgebraSpec>> {
    vec![Arc::new(build_sl(3).unwrap()), Arc::new(build_gl(3).unwrap()), Arc::new(build_sl(4).unwrap())]
}

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn rank_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("rank_sweep");
    g.sample_size(10);
    for spec in algebras() {
        let engine = PoissonEngine::new(spec.clone());
        let tp = PhaseSpace::two_toda(&spec);
        for (label, exec) in POLICIES {
            g.bench_with_input(BenchmarkId::new(label, spec.name()), &exec, |b, &exec| {
                b.iter(|| black_box(engine.rank_sweep(&tp, BracketKind::Linear, 20, 42, exec).unwrap()))
            });
        }
    }
    g.finish();
}

fn check_sweeps(c: &mut Criterion) {
    type Check = fn(&Arc<AlgebraSpec>, &CheckConfig) -> twotoda::Result<Vec<twotoda::report::CheckReport>>;
    let sweeps: [(&str, Check); 2] = [("involutivity", checks::involutivity), ("mcybe", checks::mcybe)];
    for (name, check) in sweeps {
        let mut g = c.benchmark_group(name);
        g.sample_size(10);
        for spec in algebras() {
            for (label, exec) in POLICIES {
                let cfg = CheckConfig { exec, ..CheckConfig::default() };
                g.bench_with_input(BenchmarkId::new(label, spec.name()), &cfg, |b, cfg| {
                    b.iter(|| black_box(check(&spec, cfg).unwrap()))
                });
            }
        }
        g.finish();
    }
}

criterion_group!(benches, rank_sweep, check_sweeps);
criterion_main!(benches);
