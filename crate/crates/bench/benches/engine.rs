use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use distrl::neural::Mlp;
use distrl::training::RandomAgent;
use distrl::{solve_column, EnvConfig, SacConfig, SolverOptions, Trainer};
use distrl_bench::{feed, first_column};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn column(c: &mut Criterion) {
    let bank = EnvConfig::default().load_bank().unwrap();
    let (f, spec, opts) = (feed(), first_column(), SolverOptions::default());
    c.bench_function("solve_column/30 stages", |b| {
        b.iter(|| solve_column(&bank, black_box(&f), black_box(&spec), &opts).unwrap())
    });
}

fn network(c: &mut Criterion) {
    let m = Mlp::init(&[15, 256, 256, 1], &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let x: Vec<f64> = (0..15).map(|i| i as f64 / 15.0).collect();
    c.bench_function("mlp/forward", |b| {
        b.iter(|| m.forward(black_box(&x)).unwrap())
    });
    let mut g = vec![0.0; m.params().len()];
    c.bench_function("mlp/forward+backward", |b| {
        b.iter(|| {
            let cache = m.forward_cached(black_box(&x)).unwrap();
            m.backward(&cache, &[1.0], &mut g).unwrap()
        })
    });
}

fn episodes(c: &mut Criterion) {
    let mut random = RandomAgent::new(EnvConfig::default(), 0, 100).unwrap();
    c.bench_function("episode/random policy", |b| {
        b.iter(|| random.run_episode().unwrap())
    });

    let mut group = c.benchmark_group("episode");
    group.sample_size(20);
    group.bench_function("sac train", |b| {
        b.iter_batched(
            || {
                let mut t =
                    Trainer::new(EnvConfig::default(), SacConfig::default(), 0, 1, 100).unwrap();
                // fill the buffer past the update threshold
                for _ in 0..60 {
                    t.train_episode().unwrap();
                }
                t
            },
            |mut t| t.train_episode().unwrap(),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, column, network, episodes);
criterion_main!(benches);
