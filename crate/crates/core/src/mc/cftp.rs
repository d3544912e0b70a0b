use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::heatbath::{CoupledChainPair, HeatBath};
use crate::error::{Error, Result};
use crate::exact::SpinSystem;
use crate::model::{BoundaryCondition, LatticeRegion, Site, SpinConfiguration};
use crate::rng::sweep_stream;

pub const DEFAULT_SWEEP_BUDGET: u64 = 1 << 20;

/// Coupling from the past over the monotone heat-bath coupling.
///
/// Sample `index` uses the uniforms of sweep `t < 0` from
/// `sweep_stream(seed, index, t)`, so every doubling of the start time
/// replays exactly the randomness of the shorter window.
#[derive(Clone, Debug)]
pub struct Cftp {
    dynamics: HeatBath,
    budget: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CftpSample {
    pub spins: Vec<i8>,
    /// Start time T of the window −T..0 that coalesced.
    pub window: u64,
}

/// Runs every pair from −T to 0; `true` once all have coalesced.
fn run_window(pairs: &mut [CoupledChainPair<'_>], seed: u64, index: u64, window: u64) -> bool {
    for pair in pairs.iter_mut() {
        pair.upper.iter_mut().for_each(|s| *s = 1);
        pair.lower.iter_mut().for_each(|s| *s = -1);
    }
    for t in -(window as i64)..0 {
        let mut rng = sweep_stream(seed, index, t);
        let n = pairs[0].upper.len();
        for i in 0..n {
            let u: f64 = rand::Rng::random(&mut rng);
            for pair in pairs.iter_mut() {
                pair.update(i, u);
            }
        }
    }
    pairs.iter().all(|p| p.has_coalesced())
}

impl Cftp {
    pub fn new(system: SpinSystem, beta: f64, budget: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidParameter("sweep budget must be positive".into()));
        }
        Ok(Self { dynamics: HeatBath::new(system, beta)?, budget })
    }

    pub fn dynamics(&self) -> &HeatBath {
        &self.dynamics
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// An exact sample from the Gibbs measure.
    pub fn sample(&self, seed: u64, index: u64) -> Result<CftpSample> {
        let mut pairs = [CoupledChainPair::new(&self.dynamics)];
        let window = coalesce(&mut pairs, seed, index, self.budget)?;
        Ok(CftpSample { spins: pairs[0].upper.clone(), window })
    }

    /// Exact samples under two boundary conditions sharing all uniforms.
    /// If `self` dominates `other` pointwise (e.g. + versus − boundary), the
    /// first returned sample dominates the second.
    pub fn sample_pair(&self, other: &Cftp, seed: u64, index: u64) -> Result<(CftpSample, CftpSample)> {
        if self.dynamics.len() != other.dynamics.len() || self.dynamics.beta() != other.dynamics.beta() {
            return Err(Error::DomainMismatch("paired samplers must share size and beta".into()));
        }
        let mut pairs = [CoupledChainPair::new(&self.dynamics), CoupledChainPair::new(&other.dynamics)];
        let window = coalesce(&mut pairs, seed, index, self.budget.min(other.budget))?;
        Ok((CftpSample { spins: pairs[0].upper.clone(), window }, CftpSample { spins: pairs[1].upper.clone(), window }))
    }
}

fn coalesce(pairs: &mut [CoupledChainPair<'_>], seed: u64, index: u64, budget: u64) -> Result<u64> {
    let mut window = 1u64;
    loop {
        if run_window(pairs, seed, index, window) {
            return Ok(window);
        }
        if window >= budget {
            return Err(Error::CoalescenceBudget { budget });
        }
        window = (window * 2).min(budget);
    }
}

/// One exact sample for `region` under `boundary` and `field`.
pub fn cftp_sample(region: &LatticeRegion, boundary: &BoundaryCondition, field: &[f64], beta: f64, seed: u64) -> Result<SpinConfiguration> {
    let sampler = Cftp::new(SpinSystem::from_region(region, boundary, field)?, beta, DEFAULT_SWEEP_BUDGET)?;
    SpinConfiguration::new(region, sampler.sample(seed, 0)?.spins)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMethod {
    Cftp,
    ForwardCoupling,
}

/// ⟨σ_x⟩₊ − ⟨σ_x⟩₋ from paired samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Samples that entered the estimate.
    pub samples: usize,
    pub method: GapMethod,
    /// Samples lost to the sweep budget; nonzero marks a partial result.
    pub failed: usize,
}

impl GapEstimate {
    pub fn is_partial(&self) -> bool {
        self.failed > 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapSampler {
    /// Exact paired samples.
    Cftp { budget: u64 },
    /// Time averages of the coupled ± chains after `burn_in` sweeps; biased
    /// by the finite burn-in.
    ForwardCoupling { burn_in: u64, sweeps: u64 },
}

impl Default for GapSampler {
    fn default() -> Self {
        GapSampler::Cftp { budget: DEFAULT_SWEEP_BUDGET }
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n * (n - 1.0))).sqrt())
}

/// Boundary-influence gap at `site` for one disorder, from `samples`
/// independent paired draws keyed by `seed`.
pub fn estimate_gap(
    region: &LatticeRegion,
    site: Site,
    field: &[f64],
    beta: f64,
    samples: usize,
    seed: u64,
    sampler: GapSampler,
) -> Result<GapEstimate> {
    let x = region.require_index(site)?;
    let plus = HeatBath::new(SpinSystem::from_region(region, &BoundaryCondition::all_plus(region), field)?, beta)?;
    let minus = HeatBath::new(SpinSystem::from_region(region, &BoundaryCondition::all_minus(region), field)?, beta)?;
    let draws: Vec<Option<f64>> = match sampler {
        GapSampler::Cftp { budget } => {
            let plus = Cftp { dynamics: plus, budget };
            let minus = Cftp { dynamics: minus, budget };
            (0..samples as u64)
                .into_par_iter()
                .map(|i| match plus.sample_pair(&minus, seed, i) {
                    Ok((p, m)) => Ok(Some(f64::from(p.spins[x] - m.spins[x]))),
                    Err(Error::CoalescenceBudget { .. }) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<_>>()?
        }
        GapSampler::ForwardCoupling { burn_in, sweeps } => {
            if sweeps == 0 {
                return Err(Error::InvalidParameter("forward coupling needs at least one sweep".into()));
            }
            (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let mut up = vec![1i8; plus.len()];
                    let mut down = vec![-1i8; minus.len()];
                    let mut acc = 0.0;
                    for t in 0..burn_in + sweeps {
                        let mut rng = sweep_stream(seed, i, t as i64);
                        for j in 0..plus.len() {
                            let u: f64 = rand::Rng::random(&mut rng);
                            plus.update(&mut up, j, u);
                            minus.update(&mut down, j, u);
                        }
                        if t >= burn_in {
                            acc += f64::from(up[x] - down[x]);
                        }
                    }
                    Some(acc / sweeps as f64)
                })
                .collect()
        }
    };
    let ok: Vec<f64> = draws.iter().flatten().copied().collect();
    let (mean, std_error) = mean_and_se(&ok);
    let method = match sampler {
        GapSampler::Cftp { .. } => GapMethod::Cftp,
        GapSampler::ForwardCoupling { .. } => GapMethod::ForwardCoupling,
    };
    Ok(GapEstimate { mean, std_error, samples: ok.len(), method, failed: draws.len() - ok.len() })
}

/// Per-site ⟨σ⟩ with standard errors from `samples` independent exact draws.
pub fn sample_magnetizations(sampler: &Cftp, seed: u64, samples: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let draws: Vec<Vec<i8>> = (0..samples as u64).into_par_iter().map(|i| sampler.sample(seed, i).map(|s| s.spins)).collect::<Result<_>>()?;
    let n = sampler.dynamics.len();
    let mut means = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    for site in 0..n {
        let column: Vec<f64> = draws.iter().map(|d| f64::from(d[site])).collect();
        let (m, se) = mean_and_se(&column);
        means.push(m);
        errors.push(se);
    }
    Ok((means, errors))
}
