use super::{BoundaryCondition, LatticeRegion, SpinConfiguration};
use crate::error::{Error, Result};

/// H_{γ,φ}(σ) with every internal edge counted once at unit coupling.
pub fn hamiltonian(
    region: &LatticeRegion,
    config: &SpinConfiguration,
    boundary: &BoundaryCondition,
    field: &[f64],
) -> Result<f64> {
    if config.len() != region.len() || field.len() != region.len() {
        return Err(Error::DomainMismatch("configuration or field does not match the region".into()));
    }
    if boundary.len() != region.boundary().len() {
        return Err(Error::DomainMismatch("boundary condition does not match ∂Λ".into()));
    }
    let s = config.spins();
    let g = boundary.spins();
    let internal: f64 = region.edges().iter().map(|&(a, b)| f64::from(s[a] * s[b])).sum();
    let surface: f64 = region.boundary_bonds().iter().map(|&(a, b)| f64::from(s[a] * g[b])).sum();
    let zeeman: f64 = s.iter().zip(field).map(|(&si, &f)| f * f64::from(si)).sum();
    Ok(-internal - surface - zeeman)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Site;
    use proptest::prelude::*;

    #[test]
    fn single_site_energies() {
        let r = LatticeRegion::square(1).unwrap();
        let plus = BoundaryCondition::all_plus(&r);
        let up = SpinConfiguration::uniform(&r, 1);
        assert_eq!(hamiltonian(&r, &up, &plus, &[0.0]).unwrap(), -4.0);
        assert_eq!(hamiltonian(&r, &up.negated(), &plus, &[0.0]).unwrap(), 4.0);
    }

    #[test]
    fn domino() {
        let r = LatticeRegion::from_sites([Site::new(0, 0), Site::new(1, 0)]).unwrap();
        let plus = BoundaryCondition::all_plus(&r);
        let up = SpinConfiguration::uniform(&r, 1);
        assert_eq!(r.boundary().len(), 6);
        assert_eq!(hamiltonian(&r, &up, &plus, &[0.5, -0.5]).unwrap(), -7.0);
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let r = LatticeRegion::square(2).unwrap();
        let small = LatticeRegion::square(1).unwrap();
        let up = SpinConfiguration::uniform(&small, 1);
        assert!(hamiltonian(&r, &up, &BoundaryCondition::all_plus(&r), &[0.0; 4]).is_err());
        let up = SpinConfiguration::uniform(&r, 1);
        assert!(hamiltonian(&r, &up, &BoundaryCondition::all_plus(&small), &[0.0; 4]).is_err());
        assert!(SpinConfiguration::new(&r, vec![1, 0, 1, 1]).is_err());
    }

    fn instance() -> impl Strategy<Value = (Vec<i8>, Vec<i8>, Vec<f64>, Vec<f64>)> {
        let r = LatticeRegion::square(3).unwrap();
        let spin = prop_oneof![Just(-1i8), Just(1i8)];
        (
            prop::collection::vec(spin.clone(), r.len()),
            prop::collection::vec(spin, r.boundary().len()),
            prop::collection::vec(-3.0..3.0f64, r.len()),
            prop::collection::vec(-3.0..3.0f64, r.len()),
        )
    }

    proptest! {
        #[test]
        fn spin_flip_covariance((s, g, f, _) in instance()) {
            let r = LatticeRegion::square(3).unwrap();
            let s = SpinConfiguration::new(&r, s).unwrap();
            let g = BoundaryCondition::new(&r, g).unwrap();
            let neg: Vec<f64> = f.iter().map(|x| -x).collect();
            let a = hamiltonian(&r, &s, &g, &f).unwrap();
            let b = hamiltonian(&r, &s.negated(), &g.negated(), &neg).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn affine_and_lipschitz_in_field((s, g, f, f2) in instance(), site in 0usize..9, delta in -2.0..2.0f64) {
            let r = LatticeRegion::square(3).unwrap();
            let s = SpinConfiguration::new(&r, s).unwrap();
            let g = BoundaryCondition::new(&r, g).unwrap();
            let base = hamiltonian(&r, &s, &g, &f).unwrap();
            let mut bumped = f.clone();
            bumped[site] += delta;
            let moved = hamiltonian(&r, &s, &g, &bumped).unwrap();
            prop_assert!((moved - base - (-delta * f64::from(s.spins()[site]))).abs() < 1e-12);
            let other = hamiltonian(&r, &s, &g, &f2).unwrap();
            let l1: f64 = f.iter().zip(&f2).map(|(a, b)| (a - b).abs()).sum();
            prop_assert!((base - other).abs() <= l1 + 1e-12);
        }
    }
}
