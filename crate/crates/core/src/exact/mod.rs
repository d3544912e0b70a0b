//! Exact quenched computations: free energy, magnetizations, ground states
//! and joint spin cumulants.
//!
//! Two backends share the [`SpinSystem`] form: brute-force enumeration for
//! tiny regions and a column transfer matrix for rectangles. Both evaluate
//! ground states in the (min, +) semiring with exact degeneracy counts.

mod cumulants;
mod enumeration;
mod system;
mod transfer;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, LatticeRegion, Site};

pub use cumulants::CumulantPlan;
pub use enumeration::DEFAULT_ENUMERATION_CAP;
pub use system::{Bond, SpinSystem, StripLayout};
pub use transfer::{MinCount, TransferMatrix, TransferSemiring, DEFAULT_WIDTH_CAP};

pub const DEFAULT_CUMULANT_CAP: usize = 6;

/// Which computation produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineTag {
    Enumeration,
    TransferMatrix,
    GroundState,
}

impl std::fmt::Display for EngineTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EngineTag::Enumeration => "enumeration",
            EngineTag::TransferMatrix => "transfer_matrix",
            EngineTag::GroundState => "ground_state",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    /// Transfer matrix when the system is a strip within the width cap,
    /// enumeration otherwise.
    #[default]
    Auto,
    Enumeration,
    TransferMatrix,
}

/// Free energy (absent at β = ∞), magnetizations and the engine used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedObservables {
    pub free_energy: Option<f64>,
    pub magnetization: Vec<f64>,
    pub engine: EngineTag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    /// Number of minimizing configurations.
    pub degeneracy: f64,
    /// ⟨σ_i⟩ under the uniform measure on minimizers.
    pub magnetization: Vec<f64>,
}

/// Joint cumulants of the spins at `sites`, for every tuple of order up to
/// `plan.max_order()`.
#[derive(Clone, Debug)]
pub struct CumulantTable {
    sites: Vec<Site>,
    plan: Arc<CumulantPlan>,
    values: Vec<f64>,
}

impl CumulantTable {
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn plan(&self) -> &CumulantPlan {
        &self.plan
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// κ(σ_{x₁}, …, σ_{x_k}); `None` if a site is not covered or k is out of range.
    pub fn get(&self, tuple: &[Site]) -> Option<f64> {
        let positions: Option<Vec<usize>> = tuple.iter().map(|s| self.sites.iter().position(|t| t == s)).collect();
        self.plan.index_of_tuple(&positions?).map(|i| self.values[i])
    }
}

enum Backend {
    Enumeration,
    Transfer(TransferMatrix),
}

/// Engine selection together with its capacity limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactEngine {
    pub choice: EngineChoice,
    pub enumeration_cap: usize,
    pub width_cap: usize,
    pub cumulant_cap: usize,
}

impl Default for ExactEngine {
    fn default() -> Self {
        Self {
            choice: EngineChoice::Auto,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            width_cap: DEFAULT_WIDTH_CAP,
            cumulant_cap: DEFAULT_CUMULANT_CAP,
        }
    }
}

impl ExactEngine {
    pub fn new(choice: EngineChoice) -> Self {
        Self { choice, ..Self::default() }
    }

    fn backend(&self, system: &SpinSystem) -> Result<Backend> {
        match self.choice {
            EngineChoice::Enumeration => {
                enumeration::check_size(system, self.enumeration_cap)?;
                Ok(Backend::Enumeration)
            }
            EngineChoice::TransferMatrix => Ok(Backend::Transfer(TransferMatrix::new(system, self.width_cap)?)),
            EngineChoice::Auto => match TransferMatrix::new(system, self.width_cap) {
                Ok(tm) => Ok(Backend::Transfer(tm)),
                Err(Error::WidthCap { width, cap }) if system.len() > self.enumeration_cap => Err(Error::WidthCap { width, cap }),
                Err(_) if system.len() <= self.enumeration_cap => Ok(Backend::Enumeration),
                Err(_) => Err(Error::ExactCapacity { spins: system.len() }),
            },
        }
    }

    /// Which engine a finite-β computation on `system` would use.
    pub fn engine_for(&self, system: &SpinSystem) -> Result<EngineTag> {
        Ok(match self.backend(system)? {
            Backend::Enumeration => EngineTag::Enumeration,
            Backend::Transfer(_) => EngineTag::TransferMatrix,
        })
    }

    /// F = log Σ_σ exp(−βE(σ)).
    pub fn free_energy(&self, system: &SpinSystem, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        if system.is_empty() {
            return Ok(0.0);
        }
        Ok(match self.backend(system)? {
            Backend::Enumeration => enumeration::log_partition(system, beta),
            Backend::Transfer(tm) => tm.log_partition(beta),
        })
    }

    /// ⟨σ_i⟩ for every spin. At β = ∞ this is the ground-state average.
    pub fn magnetizations(&self, system: &SpinSystem, beta: f64) -> Result<Vec<f64>> {
        if beta.is_infinite() {
            return Ok(self.ground_state(system)?.magnetization);
        }
        check_beta(beta)?;
        if beta == 0.0 {
            return Ok(vec![0.0; system.len()]);
        }
        Ok(match self.backend(system)? {
            Backend::Enumeration => enumeration::magnetizations(system, beta),
            Backend::Transfer(tm) => tm.marginals::<f64>(beta, system.len()),
        })
    }

    /// ⟨σ_i⟩ for a single spin; cheaper than [`Self::magnetizations`] on
    /// the transfer-matrix path.
    pub fn magnetization_at(&self, system: &SpinSystem, spin: usize, beta: f64) -> Result<f64> {
        if spin >= system.len() {
            return Err(Error::DomainMismatch(format!("spin {spin} out of range for {} spins", system.len())));
        }
        if beta == 0.0 {
            return Ok(0.0);
        }
        check_beta_or_inf(beta)?;
        Ok(match self.backend(system)? {
            Backend::Enumeration if beta.is_infinite() => enumeration::ground_state(system).2[spin],
            Backend::Enumeration => enumeration::magnetizations(system, beta)[spin],
            Backend::Transfer(tm) if beta.is_infinite() => tm.marginal_at::<MinCount>(spin, 0.0).expect("spin in layout"),
            Backend::Transfer(tm) => tm.marginal_at::<f64>(spin, beta).expect("spin in layout"),
        })
    }

    pub fn ground_state(&self, system: &SpinSystem) -> Result<GroundState> {
        if system.is_empty() {
            return Ok(GroundState { energy: 0.0, degeneracy: 1.0, magnetization: Vec::new() });
        }
        Ok(match self.backend(system)? {
            Backend::Enumeration => {
                let (energy, degeneracy, magnetization) = enumeration::ground_state(system);
                GroundState { energy, degeneracy, magnetization }
            }
            Backend::Transfer(tm) => {
                let (energy, degeneracy) = tm.ground_energy();
                GroundState { energy, degeneracy, magnetization: tm.marginals::<MinCount>(0.0, system.len()) }
            }
        })
    }

    pub fn observables(&self, system: &SpinSystem, beta: f64) -> Result<QuenchedObservables> {
        if beta.is_infinite() {
            let gs = self.ground_state(system)?;
            return Ok(QuenchedObservables { free_energy: None, magnetization: gs.magnetization, engine: EngineTag::GroundState });
        }
        Ok(QuenchedObservables {
            free_energy: Some(self.free_energy(system, beta)?),
            magnetization: self.magnetizations(system, beta)?,
            engine: self.engine_for(system)?,
        })
    }

    fn check_cumulant_inputs(&self, system: &SpinSystem, beta: f64, order: usize) -> Result<()> {
        check_beta(beta)?;
        if order > self.cumulant_cap {
            return Err(Error::CumulantOrder { order, cap: self.cumulant_cap });
        }
        enumeration::check_size(system, self.enumeration_cap)
    }

    /// E[Π_{j∈S} σ_{sites[j]}] for every subset S, by enumeration.
    pub fn subset_moments(&self, system: &SpinSystem, beta: f64, sites: &[usize]) -> Result<Vec<f64>> {
        check_beta(beta)?;
        enumeration::check_size(system, self.enumeration_cap)?;
        Ok(enumeration::subset_moments(system, beta, sites))
    }

    /// Gibbs probability of every sign pattern on `sites` (bit j set ⇔
    /// σ_{sites[j]} = +1), by enumeration.
    pub fn pattern_probabilities(&self, system: &SpinSystem, beta: f64, sites: &[usize]) -> Result<Vec<f64>> {
        check_beta(beta)?;
        enumeration::check_size(system, self.enumeration_cap)?;
        let mut w = enumeration::pattern_weights(system, beta, sites);
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= z);
        Ok(w)
    }

    /// Joint cumulant κ(σ_{t₁}, …, σ_{t_k}) of the spins in `tuple`, which
    /// may repeat.
    pub fn spin_cumulant(&self, system: &SpinSystem, beta: f64, tuple: &[usize]) -> Result<f64> {
        if tuple.is_empty() {
            return Err(Error::EmptyTuple);
        }
        self.check_cumulant_inputs(system, beta, tuple.len())?;
        let mut distinct: Vec<usize> = tuple.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        if let Some(&bad) = distinct.iter().find(|&&s| s >= system.len()) {
            return Err(Error::DomainMismatch(format!("spin {bad} out of range for {} spins", system.len())));
        }
        let plan = CumulantPlan::new(distinct.len(), tuple.len());
        let moments = enumeration::subset_moments(system, beta, &distinct);
        let mut out = vec![0.0; plan.len()];
        plan.evaluate(&moments, &mut out);
        let positions: Vec<usize> = tuple.iter().map(|s| distinct.binary_search(s).expect("present")).collect();
        Ok(out[plan.index_of_tuple(&positions).expect("order within plan")])
    }

    /// Cumulants of all multisets over `sites` up to `plan.max_order()`,
    /// written into `out`.
    pub fn cumulants_into(&self, system: &SpinSystem, beta: f64, sites: &[usize], plan: &CumulantPlan, out: &mut [f64]) -> Result<()> {
        if plan.dims() != sites.len() {
            return Err(Error::DomainMismatch("cumulant plan does not match site count".into()));
        }
        self.check_cumulant_inputs(system, beta, plan.max_order())?;
        let moments = enumeration::subset_moments(system, beta, sites);
        plan.evaluate(&moments, out);
        Ok(())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_infinite() {
        return Err(Error::InfiniteBeta);
    }
    check_beta_or_inf(beta)
}

fn check_beta_or_inf(beta: f64) -> Result<()> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::InvalidParameter(format!("beta must be in [0, inf], got {beta}")));
    }
    Ok(())
}

/// log Z for `region` under boundary `boundary` and per-site `field`.
pub fn free_energy(region: &LatticeRegion, boundary: &BoundaryCondition, field: &[f64], beta: f64) -> Result<f64> {
    ExactEngine::default().free_energy(&SpinSystem::from_region(region, boundary, field)?, beta)
}

pub fn magnetizations(region: &LatticeRegion, boundary: &BoundaryCondition, field: &[f64], beta: f64) -> Result<Vec<f64>> {
    ExactEngine::default().magnetizations(&SpinSystem::from_region(region, boundary, field)?, beta)
}

pub fn ground_state_magnetizations(region: &LatticeRegion, boundary: &BoundaryCondition, field: &[f64]) -> Result<Vec<f64>> {
    Ok(ExactEngine::default().ground_state(&SpinSystem::from_region(region, boundary, field)?)?.magnetization)
}

/// Joint cumulant of the spins at the sites of `tuple`.
pub fn spin_cumulants(region: &LatticeRegion, boundary: &BoundaryCondition, field: &[f64], beta: f64, tuple: &[Site]) -> Result<f64> {
    let system = SpinSystem::from_region(region, boundary, field)?;
    let spins: Vec<usize> = tuple.iter().map(|&s| region.require_index(s)).collect::<Result<_>>()?;
    ExactEngine::default().spin_cumulant(&system, beta, &spins)
}

/// Full cumulant table over `sites` up to `order`.
pub fn cumulant_table(
    region: &LatticeRegion,
    boundary: &BoundaryCondition,
    field: &[f64],
    beta: f64,
    sites: &[Site],
    order: usize,
) -> Result<CumulantTable> {
    let engine = ExactEngine::default();
    let system = SpinSystem::from_region(region, boundary, field)?;
    if sites.is_empty() {
        return Err(Error::EmptyTuple);
    }
    let spins: Vec<usize> = sites.iter().map(|&s| region.require_index(s)).collect::<Result<_>>()?;
    let plan = Arc::new(CumulantPlan::new(spins.len(), order));
    let mut values = vec![0.0; plan.len()];
    engine.cumulants_into(&system, beta, &spins, &plan, &mut values)?;
    Ok(CumulantTable { sites: sites.to_vec(), plan, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DisorderRealization;

    fn instance(n: usize, seed: u64, replica: u64) -> (LatticeRegion, Vec<f64>) {
        let region = LatticeRegion::square(n).unwrap();
        let field = DisorderRealization::generate(&region, seed, replica).values().to_vec();
        (region, field)
    }

    #[test]
    fn single_site_closed_forms() {
        let region = LatticeRegion::square(1).unwrap();
        let plus = BoundaryCondition::all_plus(&region);
        let f = free_energy(&region, &plus, &[0.0], 1.0).unwrap();
        assert!((f - 4.000335406372896).abs() < 1e-12);
        let m = magnetizations(&region, &plus, &[0.0], 1.0).unwrap();
        assert!((m[0] - 0.999329299739067).abs() < 1e-12);
        assert_eq!(free_energy(&region, &plus, &[0.0], 0.0).unwrap(), std::f64::consts::LN_2);
    }

    #[test]
    fn engines_agree_on_rectangles() {
        for (w, h) in [(3, 3), (4, 2), (2, 5), (1, 6)] {
            let region = LatticeRegion::rectangle(Site::new(0, 0), w, h).unwrap();
            let field = DisorderRealization::generate(&region, 4, 0).values().to_vec();
            let gamma = BoundaryCondition::all_minus(&region);
            let system = SpinSystem::from_region(&region, &gamma, &field).unwrap();
            let en = ExactEngine::new(EngineChoice::Enumeration);
            let tm = ExactEngine::new(EngineChoice::TransferMatrix);
            for beta in [0.3, 1.0, 2.5] {
                assert!((en.free_energy(&system, beta).unwrap() - tm.free_energy(&system, beta).unwrap()).abs() < 1e-9);
                let a = en.magnetizations(&system, beta).unwrap();
                let b = tm.magnetizations(&system, beta).unwrap();
                for (i, (x, y)) in a.iter().zip(&b).enumerate() {
                    assert!((x - y).abs() < 1e-9, "{w}x{h} β={beta} site {i}: {x} vs {y}");
                    assert!((tm.magnetization_at(&system, i, beta).unwrap() - x).abs() < 1e-9);
                }
            }
            let g1 = en.ground_state(&system).unwrap();
            let g2 = tm.ground_state(&system).unwrap();
            assert!((g1.energy - g2.energy).abs() < 1e-9);
            assert_eq!(g1.degeneracy, g2.degeneracy);
            for (x, y) in g1.magnetization.iter().zip(&g2.magnetization) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ground_state_ties_are_counted() {
        let region = LatticeRegion::square(1).unwrap();
        let gamma = BoundaryCondition::new(&region, vec![1, 1, -1, -1]).unwrap();
        let system = SpinSystem::from_region(&region, &gamma, &[0.0]).unwrap();
        for choice in [EngineChoice::Enumeration, EngineChoice::TransferMatrix] {
            let gs = ExactEngine::new(choice).ground_state(&system).unwrap();
            assert_eq!(gs.degeneracy, 2.0);
            assert_eq!(gs.magnetization, vec![0.0]);
        }
        let plus = BoundaryCondition::all_plus(&region);
        assert_eq!(ground_state_magnetizations(&region, &plus, &[0.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn ground_state_matches_large_beta() {
        let (region, field) = instance(2, 12, 3);
        let field: Vec<f64> = field.iter().map(|g| 0.1 * g).collect();
        let gamma = BoundaryCondition::all_plus(&region);
        let gs = ground_state_magnetizations(&region, &gamma, &field).unwrap();
        let hot = magnetizations(&region, &gamma, &field, 50.0).unwrap();
        for (a, b) in gs.iter().zip(&hot) {
            assert!((a - b).abs() < 1e-6);
        }
        assert_eq!(magnetizations(&region, &gamma, &field, f64::INFINITY).unwrap(), gs);
    }

    #[test]
    fn infinite_beta_has_no_free_energy() {
        let (region, field) = instance(2, 1, 0);
        let gamma = BoundaryCondition::all_plus(&region);
        assert!(matches!(free_energy(&region, &gamma, &field, f64::INFINITY), Err(Error::InfiniteBeta)));
        let sys = SpinSystem::from_region(&region, &gamma, &field).unwrap();
        let obs = ExactEngine::default().observables(&sys, f64::INFINITY).unwrap();
        assert_eq!(obs.engine, EngineTag::GroundState);
        assert!(obs.free_energy.is_none());
    }

    #[test]
    fn capacity_errors() {
        let (region, field) = instance(17, 1, 0);
        let sys = SpinSystem::from_region(&region, &BoundaryCondition::all_plus(&region), &field).unwrap();
        assert!(matches!(ExactEngine::default().free_energy(&sys, 1.0), Err(Error::WidthCap { width: 17, cap: 16 })));
        let sites: Vec<Site> = (0..5).flat_map(|x| (0..5).map(move |y| Site::new(x, y))).filter(|s| *s != Site::new(0, 0)).collect();
        let ragged = LatticeRegion::from_sites(sites).unwrap();
        let sys = SpinSystem::from_region(&ragged, &BoundaryCondition::all_plus(&ragged), &[0.0; 24]).unwrap();
        assert!(ExactEngine::default().free_energy(&sys, 1.0).is_ok());
        let sites: Vec<Site> = (0..6).flat_map(|x| (0..5).map(move |y| Site::new(x, y))).filter(|s| *s != Site::new(0, 0)).collect();
        let ragged = LatticeRegion::from_sites(sites).unwrap();
        let sys = SpinSystem::from_region(&ragged, &BoundaryCondition::all_plus(&ragged), &vec![0.0; 29]).unwrap();
        assert!(matches!(ExactEngine::default().free_energy(&sys, 1.0), Err(Error::ExactCapacity { spins: 29 })));
    }

    #[test]
    fn low_order_cumulants() {
        let (region, field) = instance(2, 5, 2);
        let gamma = BoundaryCondition::all_plus(&region);
        let m = magnetizations(&region, &gamma, &field, 0.7).unwrap();
        for (i, &site) in region.sites().iter().enumerate() {
            let k1 = spin_cumulants(&region, &gamma, &field, 0.7, &[site]).unwrap();
            assert!((k1 - m[i]).abs() < 1e-14);
            let k2 = spin_cumulants(&region, &gamma, &field, 0.7, &[site, site]).unwrap();
            assert!((k2 - (1.0 - m[i] * m[i])).abs() < 1e-14);
        }
        let too_long = vec![region.site(0); 7];
        assert!(matches!(spin_cumulants(&region, &gamma, &field, 0.7, &too_long), Err(Error::CumulantOrder { order: 7, cap: 6 })));
        assert!(matches!(spin_cumulants(&region, &gamma, &field, 0.7, &[]), Err(Error::EmptyTuple)));
    }

    #[test]
    fn table_is_permutation_invariant() {
        let (region, field) = instance(2, 8, 0);
        let gamma = BoundaryCondition::all_minus(&region);
        let table = cumulant_table(&region, &gamma, &field, 1.0, region.sites(), 4).unwrap();
        let s = region.sites();
        let a = table.get(&[s[0], s[1], s[3], s[1]]).unwrap();
        let b = table.get(&[s[1], s[3], s[1], s[0]]).unwrap();
        assert_eq!(a, b);
        let direct = spin_cumulants(&region, &gamma, &field, 1.0, &[s[3], s[1], s[0], s[1]]).unwrap();
        assert!((a - direct).abs() < 1e-14);
    }
}
