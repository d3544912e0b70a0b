use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, LatticeRegion};

/// A ferromagnetic coupling between two spins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub coupling: f64,
}

/// Column-by-column ordering of a rectangular system: step `t` visits the
/// spin `spin_at[t]` at column `t / rows`, row `t % rows`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StripLayout {
    pub rows: usize,
    pub cols: usize,
    pub spin_at: Vec<usize>,
}

impl StripLayout {
    /// Layout for a rectangular region, sweeping along its longer side so the
    /// strip width is the shorter one.
    pub fn for_region(region: &LatticeRegion) -> Option<Self> {
        let rect = region.rect()?;
        let (w, h) = (rect.width, rect.height);
        // Region order is x-major: index = dx * h + dy.
        let layout = if h <= w {
            Self { rows: h, cols: w, spin_at: (0..w * h).collect() }
        } else {
            let spin_at = (0..w * h).map(|t| (t % w) * h + t / w).collect();
            Self { rows: w, cols: h, spin_at }
        };
        Some(layout)
    }
}

/// An Ising system in compiled form:
/// E(σ) = −Σ_bonds J σ_a σ_b − Σ_i bias_i σ_i.
///
/// Boundary spins are folded into `bias`, so zero boundary on a subset of
/// bonds is expressed by leaving those contributions out.
#[derive(Clone, Debug)]
pub struct SpinSystem {
    bias: Vec<f64>,
    bonds: Vec<Bond>,
    neighbors: Vec<Vec<(usize, f64)>>,
    layout: Option<StripLayout>,
}

impl SpinSystem {
    pub fn new(bias: Vec<f64>, bonds: Vec<Bond>, layout: Option<StripLayout>) -> Self {
        let mut neighbors = vec![Vec::new(); bias.len()];
        for bond in &bonds {
            neighbors[bond.a].push((bond.b, bond.coupling));
            neighbors[bond.b].push((bond.a, bond.coupling));
        }
        Self { bias, bonds, neighbors, layout }
    }

    /// The unit-coupling system of `region` under boundary `boundary` and
    /// per-site `field`.
    pub fn from_region(region: &LatticeRegion, boundary: &BoundaryCondition, field: &[f64]) -> Result<Self> {
        if field.len() != region.len() {
            return Err(Error::DomainMismatch(format!("field has {} values for {} sites", field.len(), region.len())));
        }
        if boundary.len() != region.boundary().len() {
            return Err(Error::DomainMismatch("boundary condition does not match ∂Λ".into()));
        }
        let mut bias = field.to_vec();
        for &(site, b) in region.boundary_bonds() {
            bias[site] += f64::from(boundary.spins()[b]);
        }
        let bonds = region.edges().iter().map(|&(a, b)| Bond { a, b, coupling: 1.0 }).collect();
        Ok(Self::new(bias, bonds, StripLayout::for_region(region)))
    }

    /// The same bonds and layout with a different bias vector.
    pub fn with_bias(&self, bias: Vec<f64>) -> Self {
        assert_eq!(bias.len(), self.bias.len());
        Self { bias, bonds: self.bonds.clone(), neighbors: self.neighbors.clone(), layout: self.layout.clone() }
    }

    pub fn len(&self) -> usize {
        self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bias.is_empty()
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn layout(&self) -> Option<&StripLayout> {
        self.layout.as_ref()
    }

    /// Σ_j J_ij σ_j + bias_i.
    pub fn local_field(&self, spins: &[i8], i: usize) -> f64 {
        self.neighbors[i].iter().map(|&(j, c)| c * f64::from(spins[j])).sum::<f64>() + self.bias[i]
    }

    /// Energy evaluated from scratch in a fixed summation order.
    pub fn energy(&self, spins: &[i8]) -> f64 {
        let pair: f64 = self.bonds.iter().map(|b| b.coupling * f64::from(spins[b.a] * spins[b.b])).sum();
        let zeeman: f64 = self.bias.iter().zip(spins).map(|(h, &s)| h * f64::from(s)).sum();
        -pair - zeeman
    }

    /// Total coupling per unordered spin pair.
    pub fn coupling_lookup(&self) -> HashMap<(usize, usize), f64> {
        let mut map = HashMap::new();
        for b in &self.bonds {
            *map.entry((b.a.min(b.b), b.a.max(b.b))).or_insert(0.0) += b.coupling;
        }
        map
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{hamiltonian, DisorderRealization, Site, SpinConfiguration};
    use crate::rng::auxiliary_stream;
    use rand::Rng;

    #[test]
    fn energy_matches_hamiltonian() {
        let region = LatticeRegion::from_sites([Site::new(0, 0), Site::new(1, 0), Site::new(0, 1), Site::new(1, 1), Site::new(2, 1)]).unwrap();
        let mut rng = auxiliary_stream(1, 0);
        for replica in 0..20 {
            let field = DisorderRealization::generate(&region, 9, replica).values().to_vec();
            let gamma = BoundaryCondition::random(&region, &mut rng);
            let spins: Vec<i8> = (0..region.len()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let system = SpinSystem::from_region(&region, &gamma, &field).unwrap();
            let config = SpinConfiguration::new(&region, spins.clone()).unwrap();
            let h = hamiltonian(&region, &config, &gamma, &field).unwrap();
            assert!((system.energy(&spins) - h).abs() < 1e-12);
        }
    }

    #[test]
    fn tall_rectangles_are_transposed() {
        let region = LatticeRegion::rectangle(Site::new(0, 0), 2, 5).unwrap();
        let layout = StripLayout::for_region(&region).unwrap();
        assert_eq!((layout.rows, layout.cols), (2, 5));
        // Second step is the spin at (1, 0), one column over in x.
        assert_eq!(region.site(layout.spin_at[1]), Site::new(1, 0));
        let mut seen = layout.spin_at.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
    }
}
