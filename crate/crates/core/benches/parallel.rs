//! Data-parallel kernels on the full rayon pool versus a single-thread pool.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;
use soliton_core::dressing::{dress, vacuum_seed};
use soliton_core::scattering::Scatterer;
use soliton_core::{n_soliton, ComplexField, Grid, SearchRegion, SolitonParams};

fn params() -> Vec<SolitonParams> {
    vec![
        SolitonParams::new(0.4, 0.6, -4.0, 0.0).unwrap(),
        SolitonParams::new(-0.2, 0.8, 0.0, 1.0).unwrap(),
        SolitonParams::new(0.1, 1.1, 4.0, -0.5).unwrap(),
    ]
}

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let full = rayon::current_num_threads();
    vec![
        ("sequential", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", ThreadPoolBuilder::new().num_threads(full).build().unwrap()),
    ]
}

fn bench_dressing(c: &mut Criterion) {
    let grid = Grid::centered(80.0, 16384).unwrap();
    let ps = params();
    let seeds = vacuum_seed(&ps, 0.0, grid).unwrap();
    let zero = ComplexField::zeros(grid, 0.0);
    let mut g = c.benchmark_group("dress_3_solitons_16384");
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            pool.install(|| b.iter(|| dress(&zero, &seeds).unwrap()))
        });
    }
    g.finish();
}

fn bench_eigen_search(c: &mut Criterion) {
    let grid = Grid::centered(80.0, 2048).unwrap();
    let q = n_soliton(&params(), grid, 0.0).unwrap();
    let sc = Scatterer::new(&q).unwrap();
    let region = SearchRegion::new(-1.0, 1.0, 0.2, 1.5).unwrap().with_resolution(16);
    let mut g = c.benchmark_group("eigenvalue_search_2048");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            pool.install(|| b.iter(|| sc.find_eigenvalues(&region).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_dressing, bench_eigen_search);
criterion_main!(benches);
