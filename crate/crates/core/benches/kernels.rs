use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use plnc_core::fadespace::FadeCatalog;
use plnc_core::maplib::{generate_library, GenOptions};
use plnc_core::relaysim::{run_sim, Scheme, SimConfig, StopRule};
use plnc_core::{Execution, PskParams, SystemDims};

const MODES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn catalog(c: &mut Criterion) {
    let mut g = c.benchmark_group("catalog_qpsk_2x2");
    let p = PskParams::new(2).unwrap();
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| FadeCatalog::build(p, SystemDims::square(2).unwrap(), exec).unwrap())
        });
    }
    g.finish();
}

fn library(c: &mut Criterion) {
    let mut g = c.benchmark_group("library");
    g.sample_size(10);
    for (label, p, n) in [
        ("bpsk_2x2", PskParams::new(1).unwrap(), 2),
        ("qpsk_1x1", PskParams::new(2).unwrap(), 1),
    ] {
        let dims = SystemDims::square(n).unwrap();
        for (name, exec) in MODES {
            let opts = GenOptions {
                exec,
                ..GenOptions::default()
            };
            g.bench_with_input(BenchmarkId::new(label, name), &opts, |b, opts| {
                b.iter(|| generate_library(p, &dims, opts).unwrap())
            });
        }
    }
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("sim_bpsk_2x2_adaptive");
    g.sample_size(10);
    let p = PskParams::new(1).unwrap();
    let lib = generate_library(p, &SystemDims::square(2).unwrap(), &GenOptions::default()).unwrap();
    for (name, exec) in MODES {
        let mut cfg = SimConfig::new(p, SystemDims::new(2, 2, 2).unwrap(), Scheme::Adaptive);
        cfg.snr_db = vec![10.0];
        cfg.stop = StopRule {
            min_trials: 20_000,
            min_errors: 1,
            max_trials: 20_000,
        };
        cfg.exec = exec;
        g.bench_function(name, |b| b.iter(|| run_sim(&cfg, Some(&lib)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, catalog, library, simulation);
criterion_main!(benches);
