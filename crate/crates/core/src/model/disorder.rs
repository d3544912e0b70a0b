use serde::{Deserialize, Serialize};

use super::{Block, LatticeRegion};
use crate::error::{Error, Result};
use crate::rng::site_gaussian;

/// Where a disorder realization came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DisorderSource {
    /// Drawn from the counter-based generator.
    Counter { seed: u64, replica: u64 },
    /// Supplied directly (quadrature nodes, hand-built instances).
    Explicit,
}

/// Standard Gaussian draws g_x, one per site of a region.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderRealization {
    values: Vec<f64>,
    source: DisorderSource,
}

impl DisorderRealization {
    /// Draws g_x for every site, keyed by `(seed, replica, site)`.
    pub fn generate(region: &LatticeRegion, seed: u64, replica: u64) -> Self {
        let values = region.sites().iter().map(|&s| site_gaussian(seed, replica, s)).collect();
        Self { values, source: DisorderSource::Counter { seed, replica } }
    }

    pub fn from_values(region: &LatticeRegion, values: Vec<f64>) -> Result<Self> {
        if values.len() != region.len() {
            return Err(Error::DomainMismatch(format!(
                "disorder has {} values for {} sites",
                values.len(),
                region.len()
            )));
        }
        Ok(Self { values, source: DisorderSource::Explicit })
    }

    pub fn zeros(region: &LatticeRegion) -> Self {
        Self { values: vec![0.0; region.len()], source: DisorderSource::Explicit }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> DisorderSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self { values: self.values.iter().map(|g| -g).collect(), source: DisorderSource::Explicit }
    }
}

/// Inverse temperature β ∈ [0, ∞] and field variance v > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    beta: f64,
    v: f64,
}

impl ModelParams {
    pub fn new(beta: f64, v: f64) -> Result<Self> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!("beta must lie in [0, inf], got {beta}")));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("v must be positive and finite, got {v}")));
        }
        Ok(Self { beta, v })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn sqrt_v(&self) -> f64 {
        self.v.sqrt()
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(beta, self.v)
    }
}

/// Shift of the standardized field by `h` on the sites of `block`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockShift {
    pub block: Option<Block>,
    pub h: f64,
}

impl BlockShift {
    pub fn none() -> Self {
        Self { block: None, h: 0.0 }
    }

    pub fn new(block: Block, h: f64) -> Self {
        Self { block: Some(block), h }
    }

    pub fn applies_to(&self, site: super::Site) -> bool {
        self.block.is_some_and(|b| b.contains(site))
    }
}

/// Per-site field entering the Hamiltonian: √v·(g_x + h·1{x∈B}).
///
/// The shift is applied to the standardized variable, so that
/// d/dh acts as Σ_{x∈B} ∂/∂g_x.
pub fn effective_field(
    region: &LatticeRegion,
    disorder: &DisorderRealization,
    params: &ModelParams,
    shift: &BlockShift,
) -> Result<Vec<f64>> {
    if disorder.len() != region.len() {
        return Err(Error::DomainMismatch(format!(
            "disorder has {} values for {} sites",
            disorder.len(),
            region.len()
        )));
    }
    if let Some(block) = &shift.block {
        if !region.contains_block(block) {
            return Err(Error::BlockOutsideRegion);
        }
    }
    let sqrt_v = params.sqrt_v();
    Ok(region
        .sites()
        .iter()
        .zip(disorder.values())
        .map(|(&s, &g)| if shift.applies_to(s) { sqrt_v * (g + shift.h) } else { sqrt_v * g })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Site;

    #[test]
    fn unit_variance_without_shift_is_identity() {
        let r = LatticeRegion::square(3).unwrap();
        let d = DisorderRealization::generate(&r, 5, 0);
        let p = ModelParams::new(1.0, 1.0).unwrap();
        assert_eq!(effective_field(&r, &d, &p, &BlockShift::none()).unwrap(), d.values());
    }

    #[test]
    fn variance_scales_outside_block() {
        let r = LatticeRegion::square(2).unwrap();
        let d = DisorderRealization::from_values(&r, vec![0.5; 4]).unwrap();
        let p = ModelParams::new(1.0, 4.0).unwrap();
        let shift = BlockShift::new(Block::new(Site::new(1, 1), 1), 3.0);
        let f = effective_field(&r, &d, &p, &shift).unwrap();
        assert_eq!(f[0], 1.0);
    }

    #[test]
    fn shift_inside_block() {
        let r = LatticeRegion::square(2).unwrap();
        let d = DisorderRealization::zeros(&r);
        let p = ModelParams::new(1.0, 1.0).unwrap();
        let shift = BlockShift::new(Block::new(Site::new(0, 0), 1), 0.2);
        let f = effective_field(&r, &d, &p, &shift).unwrap();
        assert_eq!(f, vec![0.2, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(f64::INFINITY, 1.0).unwrap().is_zero_temperature());
        assert!(ModelParams::new(-0.1, 1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn block_must_fit() {
        let r = LatticeRegion::square(2).unwrap();
        let d = DisorderRealization::zeros(&r);
        let p = ModelParams::new(1.0, 1.0).unwrap();
        let shift = BlockShift::new(Block::new(Site::new(1, 1), 2), 0.2);
        assert!(matches!(effective_field(&r, &d, &p, &shift), Err(Error::BlockOutsideRegion)));
    }
}
