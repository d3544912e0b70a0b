use rand::Rng;

use super::LatticeRegion;
use crate::error::{Error, Result};

/// A spin assignment σ ∈ {−1, +1}^Λ, indexed like the region's sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
}

impl SpinConfiguration {
    pub fn new(region: &LatticeRegion, spins: Vec<i8>) -> Result<Self> {
        check_spins(&spins, region.len(), "configuration")?;
        Ok(Self { spins })
    }

    pub fn uniform(region: &LatticeRegion, spin: i8) -> Self {
        Self { spins: vec![spin; region.len()] }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self { spins: self.spins.iter().map(|s| -s).collect() }
    }

    /// Sitewise order σ ≤ τ.
    pub fn is_below(&self, other: &Self) -> bool {
        self.spins.iter().zip(&other.spins).all(|(a, b)| a <= b)
    }
}

/// A boundary condition γ ∈ {−1, +1}^∂Λ, indexed like `region.boundary()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryCondition {
    spins: Vec<i8>,
}

impl BoundaryCondition {
    pub fn new(region: &LatticeRegion, spins: Vec<i8>) -> Result<Self> {
        check_spins(&spins, region.boundary().len(), "boundary condition")?;
        Ok(Self { spins })
    }

    pub fn all_plus(region: &LatticeRegion) -> Self {
        Self { spins: vec![1; region.boundary().len()] }
    }

    pub fn all_minus(region: &LatticeRegion) -> Self {
        Self { spins: vec![-1; region.boundary().len()] }
    }

    /// `+` or `−` boundary by sign.
    pub fn uniform(region: &LatticeRegion, spin: i8) -> Self {
        Self { spins: vec![spin.signum(); region.boundary().len()] }
    }

    /// The boundary condition encoded by the low bits of `pattern`
    /// (bit b set ⇔ γ_b = +1).
    pub fn from_bits(region: &LatticeRegion, pattern: u64) -> Self {
        let spins = (0..region.boundary().len()).map(|b| if pattern >> b & 1 == 1 { 1 } else { -1 }).collect();
        Self { spins }
    }

    pub fn random<R: Rng>(region: &LatticeRegion, rng: &mut R) -> Self {
        let spins = (0..region.boundary().len()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self { spins }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self { spins: self.spins.iter().map(|s| -s).collect() }
    }
}

fn check_spins(spins: &[i8], expected: usize, what: &str) -> Result<()> {
    if spins.len() != expected {
        return Err(Error::DomainMismatch(format!("{what} has {} entries, expected {expected}", spins.len())));
    }
    if let Some(bad) = spins.iter().find(|s| **s != 1 && **s != -1) {
        return Err(Error::DomainMismatch(format!("{what} entry {bad} is not ±1")));
    }
    Ok(())
}
