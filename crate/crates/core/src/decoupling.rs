//! Free-energy surgery around a block B ⊂ Λ: cutting every bond between B
//! and the rest (including B's bonds to ∂Λ) splits the free energy into a
//! part on B alone and a part on Λ∖B that does not see the block shift.
//!
//! The shift follows [`effective_field`](crate::model::effective_field):
//! the field on B becomes field + √v·h.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Bond, ExactEngine, SpinSystem, StripLayout};
use crate::model::{Block, BoundaryCondition, LatticeRegion, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoupledFreeEnergies {
    /// Free energy of the cut model on Λ.
    pub g_gamma: f64,
    /// B alone, zero boundary, shifted field.
    pub g0: f64,
    /// Λ∖B with γ outside B and zero boundary towards B.
    pub r: f64,
}

struct Surgery {
    in_block: Vec<bool>,
    size: usize,
}

impl Surgery {
    fn new(region: &LatticeRegion, block: &Block, field: &[f64]) -> Result<Self> {
        if !region.contains_block(block) {
            return Err(Error::BlockOutsideRegion);
        }
        if field.len() != region.len() {
            return Err(Error::DomainMismatch(format!("field has {} values for {} sites", field.len(), region.len())));
        }
        let in_block: Vec<bool> = region.sites().iter().map(|&s| block.contains(s)).collect();
        Ok(Self { size: block.side * block.side, in_block })
    }

    fn shifted(&self, field: &[f64], params: &ModelParams, h: f64) -> Vec<f64> {
        let shift = params.sqrt_v() * h;
        field.iter().zip(&self.in_block).map(|(f, &b)| if b { f + shift } else { *f }).collect()
    }

    /// System on Λ keeping only bonds within B or within Λ∖B. Boundary
    /// bonds are kept on Λ∖B only. With `block_active = false` the block
    /// spins also lose their field, so they contribute exactly log 2 each.
    fn cut(&self, region: &LatticeRegion, boundary: &BoundaryCondition, field: &[f64], block_active: bool) -> Result<SpinSystem> {
        if boundary.len() != region.boundary().len() {
            return Err(Error::DomainMismatch("boundary condition does not match ∂Λ".into()));
        }
        let mut bias: Vec<f64> = field.iter().zip(&self.in_block).map(|(f, &b)| if b && !block_active { 0.0 } else { *f }).collect();
        for &(site, b) in region.boundary_bonds() {
            if !self.in_block[site] {
                bias[site] += f64::from(boundary.spins()[b]);
            }
        }
        let bonds = region
            .edges()
            .iter()
            .filter(|&&(a, b)| self.in_block[a] == self.in_block[b] && (block_active || !self.in_block[a]))
            .map(|&(a, b)| Bond { a, b, coupling: 1.0 })
            .collect();
        Ok(SpinSystem::new(bias, bonds, StripLayout::for_region(region)))
    }
}

fn block_system(region: &LatticeRegion, block: &Block, field: &[f64]) -> Result<SpinSystem> {
    let sub = LatticeRegion::square_at(block.origin, block.side)?;
    let sub_field: Vec<f64> = sub.sites().iter().map(|&s| region.require_index(s).map(|i| field[i])).collect::<Result<_>>()?;
    let bonds = sub.edges().iter().map(|&(a, b)| Bond { a, b, coupling: 1.0 }).collect();
    Ok(SpinSystem::new(sub_field, bonds, StripLayout::for_region(&sub)))
}

fn check_finite(params: &ModelParams) -> Result<f64> {
    if params.beta().is_infinite() {
        return Err(Error::InfiniteBeta);
    }
    Ok(params.beta())
}

/// F_γ(h): free energy on Λ with the block shift and no surgery.
pub fn shifted_free_energy(
    region: &LatticeRegion,
    block: &Block,
    boundary: &BoundaryCondition,
    field: &[f64],
    params: &ModelParams,
    h: f64,
) -> Result<f64> {
    let beta = check_finite(params)?;
    let surgery = Surgery::new(region, block, field)?;
    let system = SpinSystem::from_region(region, boundary, &surgery.shifted(field, params, h))?;
    ExactEngine::default().free_energy(&system, beta)
}

/// G_γ(h), G₀(h) and R, each from its own system.
pub fn decoupled_free_energy(
    region: &LatticeRegion,
    block: &Block,
    boundary: &BoundaryCondition,
    field: &[f64],
    params: &ModelParams,
    h: f64,
) -> Result<DecoupledFreeEnergies> {
    let beta = check_finite(params)?;
    let engine = ExactEngine::default();
    let surgery = Surgery::new(region, block, field)?;
    let shifted = surgery.shifted(field, params, h);
    let g_gamma = engine.free_energy(&surgery.cut(region, boundary, &shifted, true)?, beta)?;
    let g0 = engine.free_energy(&block_system(region, block, &shifted)?, beta)?;
    let rest = engine.free_energy(&surgery.cut(region, boundary, field, false)?, beta)?;
    let r = rest - surgery.size as f64 * std::f64::consts::LN_2;
    Ok(DecoupledFreeEnergies { g_gamma, g0, r })
}

/// α(h) = G₀(h) − G₀(0), which involves no boundary condition.
pub fn alpha_shift(region: &LatticeRegion, block: &Block, field: &[f64], params: &ModelParams, h: f64) -> Result<f64> {
    let beta = check_finite(params)?;
    if h == 0.0 {
        return Ok(0.0);
    }
    let surgery = Surgery::new(region, block, field)?;
    let engine = ExactEngine::default();
    let at = |h: f64| engine.free_energy(&block_system(region, block, &surgery.shifted(field, params, h))?, beta);
    Ok(at(h)? - at(0.0)?)
}

/// β√v Σ_{x∈B} ⟨σ_x⟩_γ, the h-derivative of F_γ at 0.
pub fn slope_identity(region: &LatticeRegion, block: &Block, boundary: &BoundaryCondition, field: &[f64], params: &ModelParams) -> Result<f64> {
    let beta = check_finite(params)?;
    let surgery = Surgery::new(region, block, field)?;
    if beta == 0.0 {
        return Ok(0.0);
    }
    let m = ExactEngine::default().magnetizations(&SpinSystem::from_region(region, boundary, field)?, beta)?;
    let total: f64 = m.iter().zip(&surgery.in_block).filter(|(_, &b)| b).map(|(m, _)| m).sum();
    Ok(beta * params.sqrt_v() * total)
}

/// |(F₊(h) − F₊(0)) − (F₋(h) − F₋(0))| / h.
pub fn gamma_slope_gap(region: &LatticeRegion, block: &Block, field: &[f64], params: &ModelParams, h: f64) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let plus = BoundaryCondition::all_plus(region);
    let minus = BoundaryCondition::all_minus(region);
    let delta = |gamma: &BoundaryCondition| -> Result<f64> {
        Ok(shifted_free_energy(region, block, gamma, field, params, h)? - shifted_free_energy(region, block, gamma, field, params, 0.0)?)
    };
    Ok((delta(&plus)? - delta(&minus)?).abs() / h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DisorderRealization, Site};

    fn params(beta: f64) -> ModelParams {
        ModelParams::new(beta, 1.0).unwrap()
    }

    #[test]
    fn additivity_and_bounds() {
        let region = LatticeRegion::square(4).unwrap();
        let block = Block::new(Site::new(1, 1), 2);
        let plus = BoundaryCondition::all_plus(&region);
        for replica in 0..5 {
            let field = DisorderRealization::generate(&region, 21, replica).values().to_vec();
            for h in [0.0, 0.3] {
                let d = decoupled_free_energy(&region, &block, &plus, &field, &params(1.0), h).unwrap();
                assert!((d.g_gamma - d.g0 - d.r).abs() < 1e-12);
                let f = shifted_free_energy(&region, &block, &plus, &field, &params(1.0), h).unwrap();
                assert!((f - d.g_gamma).abs() <= 8.0);
            }
        }
    }

    #[test]
    fn corner_blocks_lose_boundary_bonds() {
        let region = LatticeRegion::square(3).unwrap();
        let block = Block::new(Site::new(0, 0), 2);
        let field = DisorderRealization::generate(&region, 2, 0).values().to_vec();
        for gamma in [BoundaryCondition::all_plus(&region), BoundaryCondition::all_minus(&region)] {
            let d = decoupled_free_energy(&region, &block, &gamma, &field, &params(1.5), 0.2).unwrap();
            assert!((d.g_gamma - d.g0 - d.r).abs() < 1e-12);
            let f = shifted_free_energy(&region, &block, &gamma, &field, &params(1.5), 0.2).unwrap();
            assert!((f - d.g_gamma).abs() <= 4.0 * 1.5 * 2.0);
        }
    }

    #[test]
    fn r_ignores_the_shift() {
        let region = LatticeRegion::square(4).unwrap();
        let block = Block::new(Site::new(2, 0), 2);
        let field = DisorderRealization::generate(&region, 3, 1).values().to_vec();
        let plus = BoundaryCondition::all_plus(&region);
        let a = decoupled_free_energy(&region, &block, &plus, &field, &params(1.0), 0.0).unwrap();
        let b = decoupled_free_energy(&region, &block, &plus, &field, &params(1.0), 0.7).unwrap();
        assert!((a.r - b.r).abs() < 1e-12);
    }

    #[test]
    fn infinite_temperature() {
        let region = LatticeRegion::square(3).unwrap();
        let block = Block::new(Site::new(1, 1), 1);
        let field = DisorderRealization::generate(&region, 3, 1).values().to_vec();
        let d = decoupled_free_energy(&region, &block, &BoundaryCondition::all_plus(&region), &field, &params(0.0), 0.4).unwrap();
        assert_eq!(d.g_gamma, 9.0 * std::f64::consts::LN_2);
        assert_eq!(gamma_slope_gap(&region, &block, &field, &params(0.0), 0.4).unwrap(), 0.0);
        assert_eq!(slope_identity(&region, &block, &BoundaryCondition::all_plus(&region), &field, &params(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn single_spin_alpha_closed_form() {
        let region = LatticeRegion::square(3).unwrap();
        let block = Block::new(Site::new(1, 1), 1);
        let field = DisorderRealization::generate(&region, 8, 0).values().to_vec();
        let g0 = field[region.index_of(Site::new(1, 1)).unwrap()];
        let h = 0.35;
        let alpha = alpha_shift(&region, &block, &field, &params(1.0), h).unwrap();
        assert!((alpha - ((g0 + h).cosh().ln() - g0.cosh().ln())).abs() < 1e-12);
        assert_eq!(alpha_shift(&region, &block, &field, &params(1.0), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let region = LatticeRegion::square(3).unwrap();
        let field = vec![0.0; 9];
        let outside = Block::new(Site::new(2, 2), 2);
        assert!(matches!(alpha_shift(&region, &outside, &field, &params(1.0), 0.1), Err(Error::BlockOutsideRegion)));
        let block = Block::new(Site::new(0, 0), 1);
        assert!(gamma_slope_gap(&region, &block, &field, &params(1.0), 0.0).is_err());
        assert!(gamma_slope_gap(&region, &block, &field, &params(1.0), -1.0).is_err());
    }

    #[test]
    fn saturating_field_closes_the_gap() {
        let region = LatticeRegion::square(4).unwrap();
        let block = Block::new(Site::new(1, 1), 2);
        let gap = gamma_slope_gap(&region, &block, &[10.0; 16], &params(1.0), 0.5).unwrap();
        assert!(gap <= 1e-6, "gap {gap}");
    }
}
