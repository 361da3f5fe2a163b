use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use zar_core::residuals::{compute, halfnormal_envelope, EnvelopeOptions};
use zar_core::simulation::TailSpec;
use zar_core::{
    fit, run_study, ContinuousFamily, FitOptions, MeanDispersionParams, ResidualKind, ScenarioSpec, StudyOptions,
};

fn distributions(c: &mut Criterion) {
    let mut g = c.benchmark_group("distributions");
    let cases = [
        (ContinuousFamily::Beta01, 0.3, 40.0, 0.25),
        (ContinuousFamily::Gamma, 2.0, 0.5, 1.7),
        (ContinuousFamily::InverseGaussian, 100.0, 0.02, 80.0),
    ];
    for (family, mu, phi, y) in cases {
        let p = MeanDispersionParams::new(family, mu, phi).unwrap();
        g.bench_with_input(BenchmarkId::new("ln_pdf", family), &y, |b, &y| {
            b.iter(|| family.ln_pdf(&p, black_box(y)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("cdf", family), &y, |b, &y| {
            b.iter(|| family.cdf(&p, black_box(y)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("quantile", family), &0.9, |b, &q| {
            b.iter(|| family.quantile(&p, black_box(q)).unwrap())
        });
    }
    g.finish();
}

fn fitting(c: &mut Criterion) {
    let mut g = c.benchmark_group("fit");
    g.sample_size(20);
    for name in ["zabe-scenario-1", "zaga-scenario-1", "zaig-scenario-1"] {
        for n in [100, 1000] {
            let scenario = ScenarioSpec::preset(name, n).unwrap();
            let data = simulated(&scenario, 1);
            g.bench_with_input(BenchmarkId::new(name, n), &data, |b, d| {
                b.iter(|| fit(&scenario.model, d, &FitOptions::default()).unwrap())
            });
        }
    }
    g.finish();
}

fn residuals(c: &mut Criterion) {
    let scenario = ScenarioSpec::zaga_scenario1(1000);
    let data = simulated(&scenario, 2);
    let fitted = fit(&scenario.model, &data, &FitOptions::default()).unwrap();
    let mut g = c.benchmark_group("residuals");
    for kind in ["zaqr", "rq", "star-deviance", "williams"] {
        let kind: ResidualKind = kind.parse().unwrap();
        g.bench_function(kind.to_string(), |b| {
            b.iter(|| compute(&fitted, Some(&data), kind, black_box(7)).unwrap())
        });
    }
    g.finish();

    let small = ScenarioSpec::zaga_scenario1(100);
    let data = simulated(&small, 3);
    let fitted = fit(&small.model, &data, &FitOptions::default()).unwrap();
    let opts = EnvelopeOptions { replicates: 19, ..EnvelopeOptions::default() };
    c.bench_function("envelope/zaqr-n100-b19", |b| {
        b.iter(|| halfnormal_envelope(&fitted, &data, ResidualKind::ZAQR, &opts).unwrap())
    });
}

fn study(c: &mut Criterion) {
    let scenario = ScenarioSpec::zabe_scenario1(100);
    let opts = StudyOptions { reps: 50, tails: TailSpec::default(), ..StudyOptions::default() };
    let mut g = c.benchmark_group("study");
    g.sample_size(10);
    g.bench_function("zabe-n100-reps50", |b| b.iter(|| run_study(&scenario, &opts).unwrap()));
    g.finish();
}

/// One response vector drawn from the scenario's true model.
fn simulated(scenario: &ScenarioSpec, seed: u64) -> zar_core::Dataset {
    let covariates = scenario.dataset().unwrap();
    let mut rng = zar_core::rng::substream(seed, 0);
    let y = scenario
        .true_params()
        .unwrap()
        .iter()
        .map(|p| {
            zar_core::ZeroAdjusted::from_params(scenario.model.family, *p)
                .unwrap()
                .sample(&mut rng)
        })
        .collect();
    covariates.with_response(y).unwrap()
}

criterion_group!(benches, distributions, fitting, residuals, study);
criterion_main!(benches);
