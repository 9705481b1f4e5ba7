use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hetoda::{fixtures, grid, m_restricted, solve, PeriodicGrid, SolveOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn laplacian(c: &mut Criterion) {
    let mut group = c.benchmark_group("laplacian");
    for n in [64, 128, 256] {
        let g = PeriodicGrid::new(n).unwrap();
        let f = fixtures::random_field(&g, &mut ChaCha8Rng::seed_from_u64(1), 4, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| grid::laplacian(f).unwrap()));
    }
    group.finish();
}

fn cone(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let instances: Vec<_> = (0..50).map(|_| fixtures::random_cone_instance(&mut rng)).collect();
    c.bench_function("cone_check_50_instances", |b| {
        b.iter(|| {
            for (ws, gamma) in &instances {
                hetoda::check_condition_v(ws, gamma).unwrap();
            }
        })
    });
}

fn energy(c: &mut Criterion) {
    let g = PeriodicGrid::new(128).unwrap();
    let p = fixtures::manufactured_cyclic(&fixtures::manufactured_target(&g)).unwrap();
    let xi = fixtures::random_potential(&g, 3, &mut ChaCha8Rng::seed_from_u64(3), 0.5);
    c.bench_function("energy_n128_rank3", |b| b.iter(|| m_restricted(&p, &xi).unwrap()));
}

fn newton(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_manufactured");
    group.sample_size(10);
    for n in [32, 64] {
        let g = PeriodicGrid::new(n).unwrap();
        let p = fixtures::manufactured_cyclic(&fixtures::manufactured_target(&g)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| solve(p, &SolveOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, laplacian, cone, energy, newton);
criterion_main!(benches);
