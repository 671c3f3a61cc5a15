//! Sequential against rayon execution on the monic enumerations.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use amzv::chen::DegreeTable;
use amzv::exec::Exec;
use amzv::gf::FieldSpec;
use amzv::powersums::PowerSumEngine;
use amzv::ring_a::DEFAULT_BUDGET;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn power_sums(c: &mut Criterion) {
    let mut g = c.benchmark_group("power_sum");
    g.sample_size(10);
    // (q, d, s, prec): q^d monics, each inverted to prec u-digits.
    for (p, d, s, prec) in [(3u32, 7u32, 1u32, 200i64), (3, 8, 2, 200), (5, 5, 1, 400)] {
        let f = Arc::new(FieldSpec::new(p, 1, 1).unwrap());
        for (name, exec) in MODES {
            let e = PowerSumEngine::with_options(f.clone(), prec, DEFAULT_BUDGET, exec);
            g.bench_with_input(BenchmarkId::new(name, format!("q{p}_d{d}_s{s}")), &(d, s), |b, &(d, s)| {
                b.iter(|| e.power_sum_at(d, s, prec).unwrap())
            });
        }
    }
    g.finish();
}

fn degree_tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("degree_table");
    g.sample_size(10);
    for (p, d) in [(3u32, 5u32), (5, 3)] {
        let f = FieldSpec::new(p, 1, 1).unwrap();
        let prec = (p as i64 - 1) * 64;
        for (name, exec) in MODES {
            g.bench_function(BenchmarkId::new(name, format!("q{p}_d{d}")), |b| {
                b.iter(|| DegreeTable::build(&f, d, 8, prec, DEFAULT_BUDGET, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn zeta_values(c: &mut Criterion) {
    let mut g = c.benchmark_group("zeta_eval");
    g.sample_size(10);
    let f = Arc::new(FieldSpec::new(3, 1, 1).unwrap());
    let fq = f.fq().clone();
    let idx = amzv::index::Index::parse("1,2;2,2", &fq).unwrap();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "q3_1,2;2,2_prec400"), |b| {
            // Fresh engine per iteration so the power-sum cache starts empty.
            b.iter(|| PowerSumEngine::with_options(f.clone(), 400, DEFAULT_BUDGET, exec).zeta_eval(&idx).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, power_sums, degree_tables, zeta_values);
criterion_main!(benches);
