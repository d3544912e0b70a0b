//! Spin cumulants against moment sums over set partitions, with moments
//! from a direct Boltzmann sum.

use rfim_core::exact::{ExactEngine, SpinSystem};
use rfim_core::{BoundaryCondition, LatticeRegion};

fn boltzmann_moments(region: &LatticeRegion, gamma: &BoundaryCondition, field: &[f64], beta: f64) -> impl Fn(&[usize]) -> f64 {
    let n = region.len();
    let g = gamma.spins();
    let mut weights = Vec::with_capacity(1 << n);
    for p in 0..1u32 << n {
        let s = |i: usize| if p >> i & 1 == 1 { 1.0 } else { -1.0 };
        let mut minus_h: f64 = region.edges().iter().map(|&(a, b)| s(a) * s(b)).sum();
        minus_h += region.boundary_bonds().iter().map(|&(a, b)| s(a) * f64::from(g[b])).sum::<f64>();
        minus_h += (0..n).map(|i| field[i] * s(i)).sum::<f64>();
        weights.push(beta * minus_h);
    }
    let top = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = weights.iter().map(|x| (x - top).exp()).collect();
    let z: f64 = w.iter().sum();
    move |sites: &[usize]| {
        w.iter().enumerate().map(|(p, wp)| wp * sites.iter().map(|&i| if p >> i & 1 == 1 { 1.0 } else { -1.0 }).product::<f64>()).sum::<f64>() / z
    }
}

fn set_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for part in set_partitions(k - 1) {
        for b in 0..part.len() {
            let mut p = part.clone();
            p[b].push(k - 1);
            out.push(p);
        }
        let mut p = part.clone();
        p.push(vec![k - 1]);
        out.push(p);
    }
    out
}

fn oracle(moment: &dyn Fn(&[usize]) -> f64, tuple: &[usize]) -> f64 {
    set_partitions(tuple.len())
        .iter()
        .map(|pi| {
            let r = pi.len();
            let coef = (1..r).map(|i| i as f64).product::<f64>() * if r % 2 == 1 { 1.0 } else { -1.0 };
            coef * pi.iter().map(|b| moment(&b.iter().map(|&j| tuple[j]).collect::<Vec<_>>())).product::<f64>()
        })
        .sum()
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n.pow(k as u32)).map(|mut c| (0..k).map(|_| { let d = c % n; c /= n; d }).collect()).collect()
}

#[test]
fn set_partition_counts_are_bell_numbers() {
    let bell: Vec<usize> = (0..=6).map(|k| set_partitions(k).len()).collect();
    assert_eq!(bell, [1, 1, 2, 5, 15, 52, 203]);
}

#[test]
fn cumulants_match_partition_oracle_to_order_four() {
    let region = LatticeRegion::square(2).unwrap();
    let field = [0.4, -0.9, 0.15, 1.3];
    for (gamma, beta) in [(BoundaryCondition::all_plus(&region), 0.6), (BoundaryCondition::from_bits(&region, 0b1010_0110), 1.1)] {
        let moment = boltzmann_moments(&region, &gamma, &field, beta);
        let system = SpinSystem::from_region(&region, &gamma, &field).unwrap();
        let engine = ExactEngine::default();
        for k in 1..=4 {
            for t in tuples(4, k) {
                let got = engine.spin_cumulant(&system, beta, &t).unwrap();
                let want = oracle(&moment, &t);
                assert!((got - want).abs() < 1e-11, "tuple {t:?}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn sixth_order_single_site_matches_oracle() {
    let region = LatticeRegion::square(1).unwrap();
    let gamma = BoundaryCondition::all_minus(&region);
    let moment = boltzmann_moments(&region, &gamma, &[2.5], 0.7);
    let system = SpinSystem::from_region(&region, &gamma, &[2.5]).unwrap();
    for k in 1..=6 {
        let t = vec![0; k];
        let got = ExactEngine::default().spin_cumulant(&system, 0.7, &t).unwrap();
        assert!((got - oracle(&moment, &t)).abs() < 1e-10, "order {k}");
    }
}
