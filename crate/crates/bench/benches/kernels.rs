use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dbs_bench::{epa_channels, narrowband_gains};
use dbs_core::beamforming::quantizer::training_sigma;
use dbs_core::beamforming::signal::noise_variance;
use dbs_core::beamforming::{dost_round, run_adaptation, AlgorithmConfig, QuantizerSpec, TrainingMatrix};
use dbs_core::capacity::outage::sample_l1_norms;
use dbs_core::channel::{PowerDelayProfile, ResponseGrid};
use dbs_core::ofdm::{comb_grid, wideband_dost, LowpassInterpolator, OfdmConfig};
use dbs_core::{Algorithm, SeedTree};

fn training(c: &mut Criterion) {
    let mut g = c.benchmark_group("dost_round");
    let n0 = noise_variance(-5.0);
    for n in [10usize, 100] {
        let gains = narrowband_gains(1, n);
        let a = TrainingMatrix::dft(n, n).unwrap();
        let q = QuantizerSpec::auto(2, training_sigma(n, n0), 1.0).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            let mut rng = SeedTree::new(2).rng();
            b.iter(|| dost_round(&a, black_box(&gains), n0, Some(&q), &mut rng).unwrap())
        });
    }
    g.finish();
}

fn stochastic(c: &mut Criterion) {
    let mut g = c.benchmark_group("adaptation_500_iterations");
    let gains = narrowband_gains(3, 100);
    for alg in [Algorithm::Obf, Algorithm::R2bf, Algorithm::M2bf] {
        let cfg = AlgorithmConfig::default_for(alg);
        g.bench_function(alg.name(), |b| {
            let mut rng = SeedTree::new(4).rng();
            b.iter(|| run_adaptation(&cfg, black_box(&gains), -5.0, 500, &mut rng).unwrap())
        });
    }
    g.finish();
}

fn wideband(c: &mut Criterion) {
    let cfg = OfdmConfig::default();
    let channels = epa_channels(5, 10);
    let grid = ResponseGrid::new(&PowerDelayProfile::epa(), &cfg.subcarrier_frequencies());
    c.bench_function("response_grid_1200", |b| b.iter(|| grid.evaluate(black_box(&channels[0]))));

    let pilots: Vec<_> = grid.evaluate(&channels[0]).into_iter().step_by(6).collect();
    let interp = LowpassInterpolator::new(6).unwrap();
    c.bench_function("lowpass_interpolate_200_to_1200", |b| {
        b.iter(|| interp.interpolate(black_box(&pilots), 0, cfg.n_subcarriers))
    });

    let comb = comb_grid(&cfg).unwrap();
    let q = QuantizerSpec::auto(2, training_sigma(10, noise_variance(-5.0)), 1.0).unwrap();
    let noise = SeedTree::new(6);
    c.bench_function("wideband_dost_n10", |b| {
        b.iter(|| wideband_dost(black_box(&channels), &cfg, &comb, 10, -5.0, Some(&q), &noise).unwrap())
    });
}

fn outage(c: &mut Criterion) {
    let tree = SeedTree::new(7);
    c.bench_function("l1_norms_n10_10k", |b| b.iter(|| sample_l1_norms(10, 10_000, black_box(&tree))));
}

criterion_group!(benches, training, stochastic, wideband, outage);
criterion_main!(benches);
