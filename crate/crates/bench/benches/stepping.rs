use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;
use tauleap_bench::{model, warmed_up};
use tauleap_core::chebyshev::ChebyshevCoefficients;
use tauleap_core::spectral::estimate_rho;
use tauleap_core::{BuiltinModel, Method};

fn one_step(c: &mut Criterion) {
    let mm = model(BuiltinModel::MichaelisMenten);
    let mut group = c.benchmark_group("michaelis_menten_step");
    for method in [
        Method::PskTauRock,
        Method::ImplicitTau,
        Method::TrapezoidalTau,
    ] {
        let sim = warmed_up(&mm, method, 5.0);
        group.bench_function(method.name(), |b| {
            b.iter_batched(
                || sim.clone(),
                |mut s| {
                    let t = s.state().t + 0.25;
                    s.step(t).unwrap();
                    s
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();

    let nl = model(BuiltinModel::NonlinearReversible);
    let sim = warmed_up(&nl, Method::PskTauRock, 0.05);
    c.bench_function("nonlinear_reversible_psk_step", |b| {
        b.iter_batched(
            || sim.clone(),
            |mut s| {
                let t = s.state().t + 0.01;
                s.step(t).unwrap();
                s
            },
            BatchSize::SmallInput,
        )
    });
}

fn ssa_events(c: &mut Criterion) {
    let schlogl = model(BuiltinModel::Schlogl);
    let sim = warmed_up(&schlogl, Method::Ssa, 1.0);
    c.bench_function("schlogl_ssa_to_t_plus_1", |b| {
        b.iter_batched(
            || sim.clone(),
            |mut s| {
                let t = s.state().t + 1.0;
                s.advance_to(t).unwrap();
                s
            },
            BatchSize::SmallInput,
        )
    });
}

fn building_blocks(c: &mut Criterion) {
    c.bench_function("coefficients_s50", |b| {
        b.iter(|| ChebyshevCoefficients::new(black_box(50), 0.05).unwrap())
    });
    let gl = model(BuiltinModel::GeneticLoop);
    let x = [92.0, 213.0, 1.7, 18.3, 30.8];
    c.bench_function("power_method_genetic_loop", |b| {
        b.iter(|| estimate_rho(&gl.network, black_box(&x), None).unwrap())
    });
}

criterion_group!(benches, one_step, ssa_events, building_blocks);
criterion_main!(benches);
