use proptest::prelude::*;
use rfim_core::decoupling::{alpha_shift, decoupled_free_energy};
use rfim_core::exact::{EngineChoice, SpinSystem};
use rfim_core::harness::ScalePartition;
use rfim_core::mc::Cftp;
use rfim_core::model::{Block, Site};
use rfim_core::rng::site_gaussian;
use rfim_core::{BoundaryCondition, DisorderRealization, ExactEngine, LatticeRegion, ModelParams};

fn rect() -> impl Strategy<Value = LatticeRegion> {
    (1usize..=4, 1usize..=3, -3i32..3, -3i32..3).prop_map(|(w, h, x, y)| LatticeRegion::rectangle(Site::new(x, y), w, h).unwrap())
}

fn instance() -> impl Strategy<Value = (LatticeRegion, Vec<f64>, u64, f64)> {
    rect().prop_flat_map(|r| {
        let n = r.len();
        (Just(r), prop::collection::vec(-2.0f64..2.0, n), any::<u64>(), 0.05f64..2.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engines_agree((region, field, bits, beta) in instance()) {
        let gamma = BoundaryCondition::from_bits(&region, bits);
        let system = SpinSystem::from_region(&region, &gamma, &field).unwrap();
        let en = ExactEngine::new(EngineChoice::Enumeration);
        let tm = ExactEngine::new(EngineChoice::TransferMatrix);
        prop_assert!((en.free_energy(&system, beta).unwrap() - tm.free_energy(&system, beta).unwrap()).abs() < 1e-10);
        for (a, b) in en.magnetizations(&system, beta).unwrap().iter().zip(tm.magnetizations(&system, beta).unwrap()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn global_flip_negates_magnetization((region, field, bits, beta) in instance()) {
        let gamma = BoundaryCondition::from_bits(&region, bits);
        let flipped_gamma = BoundaryCondition::new(&region, gamma.spins().iter().map(|s| -s).collect()).unwrap();
        let flipped_field: Vec<f64> = field.iter().map(|f| -f).collect();
        let a = SpinSystem::from_region(&region, &gamma, &field).unwrap();
        let b = SpinSystem::from_region(&region, &flipped_gamma, &flipped_field).unwrap();
        let engine = ExactEngine::default();
        prop_assert!((engine.free_energy(&a, beta).unwrap() - engine.free_energy(&b, beta).unwrap()).abs() < 1e-10);
        for (x, y) in engine.magnetizations(&a, beta).unwrap().iter().zip(engine.magnetizations(&b, beta).unwrap()) {
            prop_assert!((x + y).abs() < 1e-10);
        }
    }

    #[test]
    fn boundary_sandwich((region, field, bits, beta) in instance()) {
        let engine = ExactEngine::default();
        let m = |g: &BoundaryCondition| engine.magnetizations(&SpinSystem::from_region(&region, g, &field).unwrap(), beta).unwrap();
        let up = m(&BoundaryCondition::all_plus(&region));
        let down = m(&BoundaryCondition::all_minus(&region));
        let mid = m(&BoundaryCondition::from_bits(&region, bits));
        for i in 0..region.len() {
            prop_assert!(down[i] <= mid[i] + 1e-12 && mid[i] <= up[i] + 1e-12);
        }
    }

    #[test]
    fn magnetization_increases_with_field((region, field, bits, beta) in instance(), bump in 0.0f64..1.0) {
        let gamma = BoundaryCondition::from_bits(&region, bits);
        let raised: Vec<f64> = field.iter().map(|f| f + bump).collect();
        let engine = ExactEngine::default();
        let a = engine.magnetizations(&SpinSystem::from_region(&region, &gamma, &field).unwrap(), beta).unwrap();
        let b = engine.magnetizations(&SpinSystem::from_region(&region, &gamma, &raised).unwrap(), beta).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x <= &(y + 1e-12));
        }
    }

    #[test]
    fn cftp_pair_is_ordered((region, field, _bits, beta) in instance(), seed in any::<u64>()) {
        let plus = SpinSystem::from_region(&region, &BoundaryCondition::all_plus(&region), &field).unwrap();
        let minus = SpinSystem::from_region(&region, &BoundaryCondition::all_minus(&region), &field).unwrap();
        let up = Cftp::new(plus, beta, 1 << 16).unwrap();
        let down = Cftp::new(minus, beta, 1 << 16).unwrap();
        let (a, b) = up.sample_pair(&down, seed, 0).unwrap();
        prop_assert!(a.spins.iter().zip(&b.spins).all(|(x, y)| x >= y));
    }

    #[test]
    fn nested_regions_share_disorder(seed in any::<u64>(), replica in 0u64..1000, n in 1usize..6) {
        let small = LatticeRegion::square(n).unwrap();
        let big = LatticeRegion::square_at(Site::new(-1, -1), n + 2).unwrap();
        let a = DisorderRealization::generate(&small, seed, replica);
        let b = DisorderRealization::generate(&big, seed, replica);
        for (i, &s) in small.sites().iter().enumerate() {
            prop_assert_eq!(a.values()[i], b.values()[big.index_of(s).unwrap()]);
            prop_assert_eq!(a.values()[i], site_gaussian(seed, replica, s));
        }
    }

    #[test]
    fn decoupled_energy_is_additive(field in prop::collection::vec(-2.0f64..2.0, 16), bits in any::<u64>(), bx in 0i32..3, by in 0i32..3, h in -1.0f64..1.0) {
        let region = LatticeRegion::square(4).unwrap();
        let block = Block::new(Site::new(bx, by), 2);
        let gamma = BoundaryCondition::from_bits(&region, bits);
        let params = ModelParams::new(0.9, 1.3).unwrap();
        let d = decoupled_free_energy(&region, &block, &gamma, &field, &params, h).unwrap();
        prop_assert!((d.g_gamma - d.g0 - d.r).abs() < 1e-12);
        let d0 = decoupled_free_energy(&region, &block, &gamma, &field, &params, 0.0).unwrap();
        let alpha = alpha_shift(&region, &block, &field, &params, h).unwrap();
        prop_assert!(((d.g_gamma - d0.g_gamma) - alpha).abs() < 1e-10);
    }

    #[test]
    fn partition_scales_bracket_root(n in 3usize..100_000_000) {
        let p = ScalePartition::new(n).unwrap();
        let root = (n as f64).sqrt();
        prop_assert!(p.scale_length(p.levels) >= root);
        prop_assert!(p.levels == 1 || p.scale_length(p.levels - 1) < root);
        for i in 1..=p.levels {
            let q = ScalePartition::with_scale(n, i).unwrap();
            prop_assert!(q.m >= 1);
            prop_assert!(q.block_count() as f64 * 4.0 * (q.m * q.m) as f64 >= (n * n) as f64);
        }
    }
}
