//! Criterion benchmarks for the exact and Monte Carlo engines.

use criterion::{BenchmarkId, Criterion};
use rfim_core::exact::SpinSystem;
use rfim_core::gaussian::{variance_identity_check, DisorderAverager};
use rfim_core::mc::{Cftp, DEFAULT_SWEEP_BUDGET};
use rfim_core::model::BlockShift;
use rfim_core::{BoundaryCondition, DisorderRealization, EngineChoice, ExactEngine, LatticeRegion, ModelParams};

fn system(side: usize) -> SpinSystem {
    let region = LatticeRegion::square(side).unwrap();
    let field = DisorderRealization::generate(&region, 1, 0);
    SpinSystem::from_region(&region, &BoundaryCondition::all_plus(&region), field.values()).unwrap()
}

pub fn benchmarks(c: &mut Criterion) {
    let mut g = c.benchmark_group("free_energy");
    for side in [3, 4] {
        let s = system(side);
        g.bench_with_input(BenchmarkId::new("enumeration", side), &s, |b, s| b.iter(|| ExactEngine::new(EngineChoice::Enumeration).free_energy(s, 1.0).unwrap()));
    }
    for side in [4, 8, 12] {
        let s = system(side);
        g.bench_with_input(BenchmarkId::new("transfer_matrix", side), &s, |b, s| b.iter(|| ExactEngine::new(EngineChoice::TransferMatrix).free_energy(s, 1.0).unwrap()));
    }
    g.finish();

    let mut g = c.benchmark_group("magnetizations");
    for side in [4, 8] {
        let s = system(side);
        g.bench_with_input(BenchmarkId::new("transfer_matrix", side), &s, |b, s| b.iter(|| ExactEngine::default().magnetizations(s, 1.0).unwrap()));
    }
    g.finish();

    let mut g = c.benchmark_group("cftp");
    for side in [4, 8] {
        let sampler = Cftp::new(system(side), 0.8, DEFAULT_SWEEP_BUDGET).unwrap();
        let mut i = 0;
        g.bench_function(BenchmarkId::new("sample", side), |b| {
            b.iter(|| {
                i += 1;
                sampler.sample(7, i).unwrap()
            })
        });
    }
    g.finish();

    let region = LatticeRegion::square(1).unwrap();
    let avg = DisorderAverager::quadrature_at_zero(&region, region.sites()).unwrap();
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let plus = BoundaryCondition::all_plus(&region);
    c.bench_function("hermite_series_single_site_k12", |b| b.iter(|| variance_identity_check(&region, &plus, params, BlockShift::none(), &avg, 12).unwrap()));
}
