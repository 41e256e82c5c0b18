use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cnlverify::hvmodels::{LeggettModel, QmFaithful};
use cnlverify::operators::{vectorize, Side};
use cnlverify::random::{random_omega, seeded_rng};
use cnlverify::sampling::{Execution, Threading};
use cnlverify::states::{make_state, SchmidtBasis};
use cnlverify::theorem::{verify_theorem, Budget, IntermediateMode};

const WORKERS: usize = 8;

fn threading_modes() -> [(&'static str, Threading); 2] {
    [("parallel", Threading::Parallel), ("sequential", Threading::Sequential)]
}

fn leggett_chain(c: &mut Criterion) {
    let mut rng = seeded_rng(1);
    let state = make_state(SchmidtBasis::standard(2)).unwrap();
    let a = vectorize(&random_omega(2, &mut rng), state.basis(Side::Alice)).unwrap();
    let mut group = c.benchmark_group("leggett_chain_n16");
    group.sample_size(10);
    for (label, threading) in threading_modes() {
        let budget = Budget::new(10_000, 0, Execution::new(WORKERS).with_threading(threading));
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| verify_theorem(&LeggettModel, &state, &a, 16, &budget, 7).unwrap())
        });
    }
    group.finish();
}

fn qm_nested(c: &mut Criterion) {
    let mut rng = seeded_rng(2);
    let state = make_state(SchmidtBasis::random(3, &mut rng)).unwrap();
    let a = vectorize(&random_omega(3, &mut rng), state.basis(Side::Alice)).unwrap();
    let model = QmFaithful::new(state.clone());
    let mut group = c.benchmark_group("qm_nested_n4");
    group.sample_size(10);
    for (label, threading) in threading_modes() {
        let budget = Budget::new(200, 200, Execution::new(WORKERS).with_threading(threading))
            .with_mode(IntermediateMode::MonteCarlo);
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| verify_theorem(&model, &state, &a, 4, &budget, 7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, leggett_chain, qm_nested);
criterion_main!(benches);
