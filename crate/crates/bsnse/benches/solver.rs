use std::f64::consts::PI;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use bsnse::engine::{solve_bsnse, SolverConfig, TerminalCondition};
use bsnse::spectral::{ModeSet, SigmaVector, VelocityField};
use bsnse::ForcingModel;

fn bench_case() -> (SolverConfig, SigmaVector, ForcingModel, TerminalCondition) {
    let config = SolverConfig {
        nu: 1.0,
        lambda_bar: 2.0,
        k_max: 2,
        horizon: 1.0,
        steps: 8,
        paths: 1024,
        basis_degree: 2,
        seed: 1,
        ..SolverConfig::default()
    };
    let modes = ModeSet::square(2.0 * PI, config.k_max);
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let profile = VelocityField::random_div_free(&modes, &mut rng, 0.8);
    let terminal = TerminalCondition::OfBrownian(Arc::new(move |w: f64| {
        profile.scale(1.0 + 0.5 * w.tanh())
    }));
    let model = ForcingModel::saturated(None, 0.5, 0.3, 1.0, config.period);
    let sigma = SigmaVector::constant([0.3, 0.0]);
    (config, sigma, model, terminal)
}

fn solver_lanes(c: &mut Criterion) {
    let (config, sigma, model, terminal) = bench_case();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);

    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        group.bench_function("sequential", |b| {
            b.iter(|| single.install(|| solve_bsnse(&config, &sigma, &model, &terminal).unwrap()))
        });
        group.bench_function("parallel", |b| {
            b.iter(|| solve_bsnse(&config, &sigma, &model, &terminal).unwrap())
        });
    }

    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential-only", |b| {
        b.iter(|| solve_bsnse(&config, &sigma, &model, &terminal).unwrap())
    });

    group.finish();
}

criterion_group!(benches, solver_lanes);
criterion_main!(benches);
