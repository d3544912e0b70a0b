use rand::Rng;
use rayon::prelude::*;

use super::blocks::{block_statistics_from, PlusMinusSeries};
use super::config::nested_square;
use super::partition::ScalePartition;
use super::report::CheckReport;
use crate::decoupling::{alpha_shift, decoupled_free_energy, gamma_slope_gap, shifted_free_energy, slope_identity};
use crate::error::{Error, Result};
use crate::exact::{EngineChoice, ExactEngine, SpinSystem};
use crate::gaussian::{
    block_taylor_check, functional_variance_check, poincare_check, tuple_diameter, variance_identity_check, DisorderAverager, LinearFunctional,
};
use crate::mc::{sample_magnetizations, Cftp, CoupledChainPair, HeatBath, DEFAULT_SWEEP_BUDGET};
use crate::model::{Block, BlockShift, BoundaryCondition, DisorderRealization, LatticeRegion, ModelParams, Site};
use crate::rng::auxiliary_stream;

pub const SELECTORS: [&str; 11] = ["all", "engines", "fkg", "domain", "derivative", "variance", "poincare", "taylor", "decoupling", "mc", "partition"];

const SEED: u64 = 20240607;

/// Runs the checks named by `selector` on their default instances.
pub fn lemma_suite(selector: &str) -> Result<Vec<CheckReport>> {
    let groups: Vec<&str> = match selector {
        "all" => SELECTORS[1..].to_vec(),
        "fkg" => vec!["fkg", "domain"],
        s if SELECTORS.contains(&s) => vec![s],
        _ => return Err(Error::UnknownSelector { name: selector.to_string(), valid: SELECTORS.join(", ") }),
    };
    let mut out = Vec::new();
    for g in groups {
        out.extend(match g {
            "engines" => engine_checks()?,
            "fkg" => fkg_checks()?,
            "domain" => vec![domain_monotonicity(&[3, 5, 7], 20, 1.0)?],
            "derivative" => derivative_checks()?,
            "variance" => variance_checks()?,
            "poincare" => poincare_checks()?,
            "taylor" => taylor_checks()?,
            "decoupling" => decoupling_checks()?,
            "mc" => mc_checks()?,
            "partition" => partition_checks()?,
            _ => unreachable!("selector list and dispatch agree"),
        });
    }
    Ok(out)
}

fn field(region: &LatticeRegion, replica: u64, params: &ModelParams) -> Vec<f64> {
    DisorderRealization::generate(region, SEED, replica).values().iter().map(|g| params.sqrt_v() * g).collect()
}

fn params(beta: f64) -> ModelParams {
    ModelParams::new(beta, 1.0).expect("valid parameters")
}

fn mags(region: &LatticeRegion, gamma: &BoundaryCondition, field: &[f64], beta: f64) -> Result<Vec<f64>> {
    ExactEngine::default().magnetizations(&SpinSystem::from_region(region, gamma, field)?, beta)
}

/// Largest |a − b| between enumeration and transfer matrix over free
/// energies and magnetizations.
pub fn cross_engine_discrepancy(side: usize, disorders: u64, betas: &[f64]) -> Result<f64> {
    let region = LatticeRegion::square(side)?;
    let plus = BoundaryCondition::all_plus(&region);
    let en = ExactEngine::new(EngineChoice::Enumeration);
    let tm = ExactEngine::new(EngineChoice::TransferMatrix);
    let per: Vec<f64> = (0..disorders)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let system = SpinSystem::from_region(&region, &plus, &field(&region, r, &params(1.0)))?;
            let mut worst: f64 = 0.0;
            for &beta in betas {
                worst = worst.max((en.free_energy(&system, beta)? - tm.free_energy(&system, beta)?).abs());
                for (a, b) in en.magnetizations(&system, beta)?.iter().zip(tm.magnetizations(&system, beta)?) {
                    worst = worst.max((a - b).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

fn engine_checks() -> Result<Vec<CheckReport>> {
    let mut out = vec![CheckReport::at_most("engines.cross_exactness", "4x4, 20 disorders, beta 0.5/1/2, plus boundary", cross_engine_discrepancy(4, 20, &[0.5, 1.0, 2.0])?, 1e-9)];
    let one = LatticeRegion::square(1)?;
    let f = crate::exact::free_energy(&one, &BoundaryCondition::all_plus(&one), &[0.0], 1.0)?;
    out.push(CheckReport::close("engines.single_site_free_energy", "1 site, plus boundary, beta 1", f, 4.000335406372896, 1e-12));
    let region = LatticeRegion::square(3)?;
    let mut worst: f64 = 0.0;
    for r in 0..10 {
        let fld: Vec<f64> = field(&region, r, &params(1.0)).iter().map(|g| (g * 4.0).round() / 4.0).collect();
        let system = SpinSystem::from_region(&region, &BoundaryCondition::all_minus(&region), &fld)?;
        let a = ExactEngine::new(EngineChoice::Enumeration).ground_state(&system)?;
        let b = ExactEngine::new(EngineChoice::TransferMatrix).ground_state(&system)?;
        worst = worst.max((a.energy - b.energy).abs()).max((a.degeneracy - b.degeneracy).abs());
        for (x, y) in a.magnetization.iter().zip(&b.magnetization) {
            worst = worst.max((x - y).abs());
        }
    }
    out.push(CheckReport::at_most("engines.ground_state_agreement", "3x3, 10 quantized disorders, minus boundary", worst, 1e-12));
    Ok(out)
}

/// Largest violation of ⟨σ⟩₋ ≤ ⟨σ⟩_γ ≤ ⟨σ⟩₊ over random boundary conditions.
pub fn fkg_sandwich_violation(side: usize, disorders: u64, boundaries: usize, beta: f64) -> Result<f64> {
    let region = LatticeRegion::square(side)?;
    let per: Vec<f64> = (0..disorders)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let fld = field(&region, r, &params(beta));
            let up = mags(&region, &BoundaryCondition::all_plus(&region), &fld, beta)?;
            let down = mags(&region, &BoundaryCondition::all_minus(&region), &fld, beta)?;
            let mut rng = auxiliary_stream(SEED, r);
            let mut worst: f64 = 0.0;
            for _ in 0..boundaries {
                let m = mags(&region, &BoundaryCondition::random(&region, &mut rng), &fld, beta)?;
                for i in 0..region.len() {
                    worst = worst.max(down[i] - m[i]).max(m[i] - up[i]);
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// max_x |sup_{γ,γ′} |⟨σ_x⟩_γ − ⟨σ_x⟩_γ′| − (⟨σ_x⟩₊ − ⟨σ_x⟩₋)| over every
/// boundary condition of a small square.
pub fn boundary_sup_discrepancy(side: usize, disorders: u64, beta: f64) -> Result<f64> {
    let region = LatticeRegion::square(side)?;
    let count = 1u64 << region.boundary().len();
    let mut worst: f64 = 0.0;
    for r in 0..disorders {
        let fld = field(&region, r, &params(beta));
        let all: Vec<Vec<f64>> = (0..count).into_par_iter().map(|p| mags(&region, &BoundaryCondition::from_bits(&region, p), &fld, beta)).collect::<Result<_>>()?;
        let up = mags(&region, &BoundaryCondition::all_plus(&region), &fld, beta)?;
        let down = mags(&region, &BoundaryCondition::all_minus(&region), &fld, beta)?;
        for i in 0..region.len() {
            let hi = all.iter().map(|m| m[i]).fold(f64::NEG_INFINITY, f64::max);
            let lo = all.iter().map(|m| m[i]).fold(f64::INFINITY, f64::min);
            worst = worst.max(((hi - lo) - (up[i] - down[i])).abs());
        }
    }
    Ok(worst)
}

fn fkg_checks() -> Result<Vec<CheckReport>> {
    Ok(vec![
        CheckReport::at_most("fkg.sandwich", "3x3, 10 disorders, 200 random boundaries, beta 1", fkg_sandwich_violation(3, 10, 200, 1.0)?, 1e-10),
        CheckReport::at_most("fkg.boundary_sup", "2x2, all 256 boundaries, 3 disorders, beta 1", boundary_sup_discrepancy(2, 3, 1.0)?, 1e-10),
    ])
}

/// Largest violation of ⟨σ_x⟩_{Λ′,+} ≥ ⟨σ_x⟩_{Λ,+} and ⟨σ_x⟩_{Λ′,−} ≤
/// ⟨σ_x⟩_{Λ,−} for nested centred squares sharing disorder.
pub fn domain_violation(sides: &[usize], disorders: u64, beta: f64) -> Result<f64> {
    let regions: Vec<LatticeRegion> = sides.iter().map(|&n| nested_square(n)).collect::<Result<_>>()?;
    let per: Vec<f64> = (0..disorders)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let ms: Vec<(Vec<f64>, Vec<f64>)> = regions
                .iter()
                .map(|region| {
                    let fld = field(region, r, &params(beta));
                    Ok((mags(region, &BoundaryCondition::all_plus(region), &fld, beta)?, mags(region, &BoundaryCondition::all_minus(region), &fld, beta)?))
                })
                .collect::<Result<_>>()?;
            let mut worst: f64 = 0.0;
            for w in 0..regions.len().saturating_sub(1) {
                let (small, big) = (&regions[w], &regions[w + 1]);
                for (i, &s) in small.sites().iter().enumerate() {
                    let j = big.require_index(s)?;
                    worst = worst.max(ms[w + 1].0[j] - ms[w].0[i]).max(ms[w].1[i] - ms[w + 1].1[j]);
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

fn domain_monotonicity(sides: &[usize], disorders: u64, beta: f64) -> Result<CheckReport> {
    let spec = format!("nested {sides:?}, {disorders} shared disorders, beta {beta}");
    Ok(CheckReport::at_most("domain.monotonicity", spec, domain_violation(sides, disorders, beta)?, 1e-10))
}

/// F(g + s) − F(g) = log⟨exp(β√v Σ_j s_j σ_j)⟩ over a pattern distribution.
fn log_ratio(probs: &[f64], scale: f64, shifts: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (p, &w) in probs.iter().enumerate() {
        let e: f64 = shifts.iter().enumerate().map(|(j, s)| if p >> j & 1 == 1 { *s } else { -*s }).sum();
        acc += w * (scale * e).exp_m1();
    }
    acc.ln_1p()
}

/// ∂^ν F in the standardized field by products of central differences with
/// step `step`, where `counts[j]` is the order along `sites[j]`.
pub fn central_difference(engine: &ExactEngine, system: &SpinSystem, params: &ModelParams, sites: &[usize], counts: &[u8], step: f64) -> Result<f64> {
    let probs = engine.pattern_probabilities(system, params.beta(), sites)?;
    let scale = params.beta() * params.sqrt_v();
    let stencils: Vec<Vec<(f64, f64)>> = counts
        .iter()
        .map(|&c| {
            let c = i32::from(c);
            (0..=c)
                .map(|i| {
                    let binom = (0..i).fold(1.0, |acc, t| acc * f64::from(c - t) / f64::from(t + 1));
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    (sign * binom, (f64::from(c) / 2.0 - f64::from(i)) * step)
                })
                .collect()
        })
        .collect();
    let order: i32 = counts.iter().map(|&c| i32::from(c)).sum();
    let mut total = 0.0;
    let mut idx = vec![0usize; stencils.len()];
    loop {
        let coef: f64 = idx.iter().zip(&stencils).map(|(&i, s)| s[i].0).product();
        let shifts: Vec<f64> = idx.iter().zip(&stencils).map(|(&i, s)| s[i].1).collect();
        total += coef * log_ratio(&probs, scale, &shifts);
        let Some(pos) = (0..idx.len()).find(|&j| idx[j] + 1 < stencils[j].len()) else { break };
        idx[pos] += 1;
        idx[..pos].iter_mut().for_each(|x| *x = 0);
    }
    Ok(total / step.powi(order))
}

/// max_x |∂F/∂g_x (central difference) − β√v⟨σ_x⟩|.
pub fn first_derivative_error(region: &LatticeRegion, disorders: u64, params: ModelParams, step: f64) -> Result<f64> {
    let engine = ExactEngine::default();
    let mut worst: f64 = 0.0;
    for r in 0..disorders {
        let system = SpinSystem::from_region(region, &BoundaryCondition::all_plus(region), &field(region, r, &params))?;
        let m = engine.magnetizations(&system, params.beta())?;
        for (i, m) in m.iter().enumerate() {
            let fd = central_difference(&engine, &system, &params, &[i], &[1], step)?;
            worst = worst.max((fd - params.beta() * params.sqrt_v() * m).abs());
        }
    }
    Ok(worst)
}

/// max over tuples of order ≤ `max_order` of |(β√v)^k κ − k-th central difference|.
pub fn cumulant_derivative_error(region: &LatticeRegion, disorders: u64, params: ModelParams, max_order: usize, step: f64) -> Result<f64> {
    let engine = ExactEngine::default();
    let n = region.len();
    let plan = crate::exact::CumulantPlan::new(n, max_order);
    let scale = params.beta() * params.sqrt_v();
    let mut worst: f64 = 0.0;
    for r in 0..disorders {
        let system = SpinSystem::from_region(region, &BoundaryCondition::all_minus(region), &field(region, r, &params))?;
        for i in 0..plan.len() {
            let counts = plan.multiset(i);
            let tuple: Vec<usize> = counts.iter().enumerate().flat_map(|(j, &c)| std::iter::repeat_n(j, c as usize)).collect();
            let exact = scale.powi(tuple.len() as i32) * engine.spin_cumulant(&system, params.beta(), &tuple)?;
            let support: Vec<usize> = (0..n).filter(|&j| counts[j] > 0).collect();
            let sub: Vec<u8> = support.iter().map(|&j| counts[j]).collect();
            let fd = central_difference(&engine, &system, &params, &support, &sub, step)?;
            worst = worst.max((fd - exact).abs());
        }
    }
    Ok(worst)
}

fn derivative_checks() -> Result<Vec<CheckReport>> {
    let two = LatticeRegion::square(2)?;
    let three = LatticeRegion::square(3)?;
    let v2 = ModelParams::new(1.0, 2.0)?;
    Ok(vec![
        CheckReport::at_most("derivative.first_order", "2x2, 5 disorders, beta 1, v 1, step 1e-4", first_derivative_error(&two, 5, params(1.0), 1e-4)?, 1e-6),
        CheckReport::at_most("derivative.first_order", "3x3, 3 disorders, beta 1, v 2, step 1e-4", first_derivative_error(&three, 3, v2, 1e-4)?, 1e-6),
        CheckReport::at_most("derivative.cumulants", "2x2, k <= 3, 3 disorders, beta 1, v 1, step 1e-3", cumulant_derivative_error(&two, 3, params(1.0), 3, 1e-3)?, 1e-6),
    ])
}

fn variance_checks() -> Result<Vec<CheckReport>> {
    let one = LatticeRegion::square(1)?;
    let plus1 = BoundaryCondition::all_plus(&one);
    let avg1 = DisorderAverager::quadrature_at_zero(&one, one.sites())?;
    let (single, _) = variance_identity_check(&one, &plus1, params(1.0), BlockShift::none(), &avg1, 12)?;
    let two = LatticeRegion::square(2)?;
    let plus2 = BoundaryCondition::all_plus(&two);
    let probes = [Site::new(0, 0), Site::new(0, 1)];
    let avg2 = DisorderAverager::quadrature_at_zero(&two, &probes)?;
    let (pair, _) = variance_identity_check(&two, &plus2, params(1.0), BlockShift::none(), &avg2, 6)?;
    let linear = LinearFunctional { coefficients: vec![0.3, -1.2, 0.0, 2.5] };
    let avg_lin = DisorderAverager::quadrature_at_zero(&two, &two.sites()[..3])?;
    let lin = functional_variance_check(&avg_lin, &linear, 3)?;
    let mut shift_worst = f64::NEG_INFINITY;
    for h in [0.0, 0.1, 0.5] {
        let shift = BlockShift::new(Block::new(Site::new(0, 0), 2), h);
        let (r, _) = variance_identity_check(&two, &plus2, params(1.0), shift, &avg2, 6)?;
        shift_worst = shift_worst.max(*r.partial_sums.last().expect("nonempty"));
    }
    Ok(vec![
        CheckReport::holds("variance.single_site_monotone", "1 site, beta 1, v 1, plus, 64-point rule, k <= 12", single.monotone),
        CheckReport::close("variance.single_site", "1 site, beta 1, v 1, plus, 64-point rule, k = 12", *single.partial_sums.last().expect("k = 12"), single.variance.value, 1e-6),
        CheckReport::holds("variance.two_probe_monotone", "2x2, probes (0,0),(0,1), beta 1, k <= 6", pair.monotone),
        CheckReport::close("variance.two_probe", "2x2, probes (0,0),(0,1), beta 1, k = 6", *pair.partial_sums.last().expect("k = 6"), pair.variance.value, 1e-4),
        CheckReport::close("variance.linear_first_order", "sum a_x g_x over 3 probe sites", lin.partial_sums[0], lin.variance.value, 1e-10),
        CheckReport::at_most("variance.uniform_in_shift", "2x2, two probes, h in {0, 0.1, 0.5}, k = 6", shift_worst, 4.0),
    ])
}

fn poincare_checks() -> Result<Vec<CheckReport>> {
    let one = LatticeRegion::square(1)?;
    let single = poincare_check(&one, &BoundaryCondition::all_plus(&one), params(1.0), &DisorderAverager::quadrature_at_zero(&one, one.sites())?)?;
    let two = LatticeRegion::square(2)?;
    let pair = poincare_check(&two, &BoundaryCondition::all_plus(&two), params(1.0), &DisorderAverager::quadrature_at_zero(&two, &two.sites()[..2])?)?;
    let three = LatticeRegion::square(3)?;
    let mc = poincare_check(&three, &BoundaryCondition::all_plus(&three), params(1.0), &DisorderAverager::monte_carlo(&three, 2000, SEED)?)?;
    Ok(vec![
        CheckReport::at_most("poincare.single_site", "1 site, beta 1, v 1, quadrature", single.variance.value, single.bound),
        CheckReport::at_most("poincare.two_probe", "2x2, probes (0,0),(0,1), beta 1, quadrature", pair.variance.value, pair.bound),
        CheckReport::at_most("poincare.monte_carlo", "3x3, beta 1, v 1, 2000 replicas, Var - 3 SE", mc.variance.value - 3.0 * mc.variance.std_error, mc.bound),
    ])
}

fn taylor_checks() -> Result<Vec<CheckReport>> {
    let one = LatticeRegion::square(1)?;
    let avg1 = DisorderAverager::quadrature_at_zero(&one, one.sites())?;
    let block = Block::new(Site::new(0, 0), 1);
    let single = block_taylor_check(&one, block, &BoundaryCondition::all_plus(&one), params(1.0), 0.1, 6, &avg1)?;
    let two = LatticeRegion::square(2)?;
    let avg2 = DisorderAverager::quadrature_at_zero(&two, &[Site::new(0, 0), Site::new(1, 0)])?;
    let pair = block_taylor_check(&two, block, &BoundaryCondition::all_plus(&two), params(1.0), 0.05, 4, &avg2)?;
    Ok(vec![
        CheckReport::close("taylor.single_site", "1 site = B, beta 1, h 0.1, k = 6", single.partial_sums[5], single.lhs.value, 1e-6),
        CheckReport::holds("taylor.single_site_monotone", "1 site = B, beta 1, h 0.1, k = 2..6", single.residuals[1..].windows(2).all(|w| w[1] < w[0])),
        CheckReport::at_most("taylor.two_by_two", "2x2, B = (0,0) 1x1, beta 1, h 0.05: residual k=4 vs k=2", pair.residuals[3], pair.residuals[1]),
    ])
}

/// Extremes of the surgery quantities over disorders, blocks, shifts and
/// boundary conditions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SurgerySummary {
    /// max |F_γ(h) − G_γ(h)| / (4βm).
    pub cut_ratio: f64,
    /// max |G_γ − G₀ − R|.
    pub additivity: f64,
    /// max |(G_γ(h) − G_γ(0)) − α(h)|.
    pub alpha_spread: f64,
    /// max |(F_γ(h) − F_γ(0)) − α(h)| / (8βm).
    pub shift_ratio: f64,
    /// max |R(h) − R(0)|.
    pub r_drift: f64,
}

pub fn surgery_summary(side: usize, blocks: &[Block], hs: &[f64], disorders: u64, beta: f64) -> Result<SurgerySummary> {
    let region = LatticeRegion::square(side)?;
    let p = params(beta);
    let per: Vec<SurgerySummary> = (0..disorders)
        .into_par_iter()
        .map(|r| -> Result<SurgerySummary> {
            let fld = field(&region, r, &p);
            let mut rng = auxiliary_stream(SEED ^ 0x5eed, r);
            let boundaries = [BoundaryCondition::all_plus(&region), BoundaryCondition::all_minus(&region), BoundaryCondition::random(&region, &mut rng)];
            let mut s = SurgerySummary::default();
            for block in blocks {
                let m = block.side as f64;
                for gamma in &boundaries {
                    let base = decoupled_free_energy(&region, block, gamma, &fld, &p, 0.0)?;
                    let f0 = shifted_free_energy(&region, block, gamma, &fld, &p, 0.0)?;
                    for &h in hs {
                        let d = decoupled_free_energy(&region, block, gamma, &fld, &p, h)?;
                        let f = shifted_free_energy(&region, block, gamma, &fld, &p, h)?;
                        let alpha = alpha_shift(&region, block, &fld, &p, h)?;
                        s.cut_ratio = s.cut_ratio.max((f - d.g_gamma).abs() / (4.0 * beta * m));
                        s.additivity = s.additivity.max((d.g_gamma - d.g0 - d.r).abs());
                        s.alpha_spread = s.alpha_spread.max(((d.g_gamma - base.g_gamma) - alpha).abs());
                        s.shift_ratio = s.shift_ratio.max(((f - f0) - alpha).abs() / (8.0 * beta * m));
                        s.r_drift = s.r_drift.max((d.r - base.r).abs());
                    }
                }
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(SurgerySummary::default(), |a, b| SurgerySummary {
        cut_ratio: a.cut_ratio.max(b.cut_ratio),
        additivity: a.additivity.max(b.additivity),
        alpha_spread: a.alpha_spread.max(b.alpha_spread),
        shift_ratio: a.shift_ratio.max(b.shift_ratio),
        r_drift: a.r_drift.max(b.r_drift),
    }))
}

/// max over all boundary conditions of a small square of |α_γ(h) − α(h)|.
pub fn exhaustive_alpha_spread(side: usize, block: Block, h: f64, beta: f64) -> Result<f64> {
    let region = LatticeRegion::square(side)?;
    let p = params(beta);
    let fld = field(&region, 0, &p);
    let alpha = alpha_shift(&region, &block, &fld, &p, h)?;
    let spreads: Vec<f64> = (0..1u64 << region.boundary().len())
        .into_par_iter()
        .map(|bits| -> Result<f64> {
            let gamma = BoundaryCondition::from_bits(&region, bits);
            let a = decoupled_free_energy(&region, &block, &gamma, &fld, &p, h)?.g_gamma - decoupled_free_energy(&region, &block, &gamma, &fld, &p, 0.0)?.g_gamma;
            Ok((a - alpha).abs())
        })
        .collect::<Result<_>>()?;
    Ok(spreads.into_iter().fold(0.0, f64::max))
}

/// |slope identity − (F(h) − F(−h))/2h| on one instance.
pub fn slope_identity_error(side: usize, block: Block, beta: f64, h: f64) -> Result<f64> {
    let region = LatticeRegion::square(side)?;
    let p = params(beta);
    let fld = field(&region, 1, &p);
    let plus = BoundaryCondition::all_plus(&region);
    let fd = (shifted_free_energy(&region, &block, &plus, &fld, &p, h)? - shifted_free_energy(&region, &block, &plus, &fld, &p, -h)?) / (2.0 * h);
    Ok((slope_identity(&region, &block, &plus, &fld, &p)? - fd).abs())
}

fn decoupling_checks() -> Result<Vec<CheckReport>> {
    let blocks = [Block::new(Site::new(2, 2), 2), Block::new(Site::new(0, 3), 3)];
    let spec = "6x6, blocks 2x2 at (2,2) and 3x3 at (0,3), beta 1, h in {0, 0.3}, 20 disorders, +/-/random boundary";
    let s = surgery_summary(6, &blocks, &[0.0, 0.3], 20, 1.0)?;
    let region = LatticeRegion::square(6)?;
    let gap_block = Block::new(Site::new(2, 2), 2);
    let gap = gamma_slope_gap(&region, &gap_block, &field(&region, 0, &params(1.0)), &params(1.0), 0.5)?;
    Ok(vec![
        CheckReport::at_most("decoupling.cut_bound", spec, s.cut_ratio, 1.0),
        CheckReport::at_most("decoupling.additivity", spec, s.additivity, 1e-12),
        CheckReport::at_most("decoupling.alpha_boundary_free", spec, s.alpha_spread, 1e-10),
        CheckReport::at_most("decoupling.shift_bound", spec, s.shift_ratio, 1.0),
        CheckReport::at_most("decoupling.r_shift_free", spec, s.r_drift, 1e-12),
        CheckReport::at_most("decoupling.alpha_exhaustive", "2x2, B = (0,0) 1x1, all 256 boundaries, h 0.3", exhaustive_alpha_spread(2, Block::new(Site::new(0, 0), 1), 0.3, 1.0)?, 1e-10),
        CheckReport::at_most("decoupling.slope_identity", "4x4, B 2x2 at (1,1), beta 1, h 1e-4", slope_identity_error(4, Block::new(Site::new(1, 1), 2), 1.0, 1e-4)?, 1e-6),
        CheckReport::at_most("decoupling.slope_gap", "6x6, B 2x2 at (2,2), beta 1, h 0.5 (16 beta m / h = 64)", gap, 32.0),
    ])
}

/// max_x |CFTP estimate − exact| / SE, with SE = √((1 − m²)/N) from the
/// exact magnetization.
pub fn cftp_standardized_error(side: usize, beta: f64, samples: usize, seed: u64) -> Result<f64> {
    let region = LatticeRegion::square(side)?;
    let system = SpinSystem::from_region(&region, &BoundaryCondition::all_plus(&region), &field(&region, 0, &params(beta)))?;
    let exact = ExactEngine::default().magnetizations(&system, beta)?;
    let sampler = Cftp::new(system, beta, DEFAULT_SWEEP_BUDGET)?;
    let (m, _) = sample_magnetizations(&sampler, seed, samples)?;
    Ok(m.iter().zip(&exact).map(|(a, b)| (a - b).abs() / ((1.0 - b * b) / samples as f64).sqrt()).fold(0.0, f64::max))
}

/// Number of order violations in `updates` coupled updates from random
/// ordered pairs.
pub fn coupling_order_violations(side: usize, beta: f64, updates: usize) -> Result<usize> {
    let region = LatticeRegion::square(side)?;
    let dynamics = HeatBath::new(SpinSystem::from_region(&region, &BoundaryCondition::all_plus(&region), &field(&region, 2, &params(beta)))?, beta)?;
    let n = region.len();
    let mut rng = auxiliary_stream(SEED, 99);
    let mut violations = 0;
    let mut done = 0;
    while done < updates {
        let lower: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let upper: Vec<i8> = lower.iter().map(|&l| if rng.random::<bool>() { 1 } else { l }).collect();
        let mut pair = CoupledChainPair::from_states(&dynamics, upper, lower);
        for _ in 0..1000.min(updates - done) {
            pair.update(rng.random_range(0..n), rng.random());
            done += 1;
            if !pair.is_ordered() {
                violations += 1;
            }
        }
    }
    Ok(violations)
}

/// Whether repeated CFTP draws with the same seed coincide.
pub fn cftp_reruns_identical(side: usize, beta: f64, draws: u64) -> Result<bool> {
    let region = LatticeRegion::square(side)?;
    let system = SpinSystem::from_region(&region, &BoundaryCondition::all_minus(&region), &field(&region, 3, &params(beta)))?;
    let a = Cftp::new(system.clone(), beta, DEFAULT_SWEEP_BUDGET)?;
    let b = Cftp::new(system, beta, DEFAULT_SWEEP_BUDGET)?;
    for i in 0..draws {
        if a.sample(SEED, i)? != b.sample(SEED, i)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn mc_checks() -> Result<Vec<CheckReport>> {
    Ok(vec![
        CheckReport::at_most("mc.cftp_marginals", "3x3, beta 0.8, 20000 samples, |error| / SE", cftp_standardized_error(3, 0.8, 20000, SEED)?, 4.0),
        CheckReport::at_most("mc.monotone_coupling", "4x4, beta 1, 1e5 coupled updates, violations", coupling_order_violations(4, 1.0, 100_000)? as f64, 0.0),
        CheckReport::holds("mc.cftp_determinism", "4x4, beta 1, 50 draws rerun with the same seed", cftp_reruns_identical(4, 1.0, 50)?),
    ])
}

/// First n in `range` violating a partition invariant, if any.
pub fn partition_invariant_failure(range: std::ops::RangeInclusive<usize>) -> Result<Option<usize>> {
    for n in range {
        let p = ScalePartition::new(n)?;
        for i in 1..=p.levels {
            let q = ScalePartition::with_scale(n, i)?;
            let count = q.block_count() as f64;
            let ok = q.m >= 1
                && (q.m as f64) < q.scale_length(i)
                && (q.m + 1) as f64 >= q.scale_length(i)
                && q.inner_side <= n
                && count * 4.0 * (q.m * q.m) as f64 >= (n * n) as f64;
            if !ok {
                return Ok(Some(n));
            }
        }
        let root = (n as f64).sqrt();
        if p.scale_length(p.levels) < root || (p.levels > 1 && p.scale_length(p.levels - 1) >= root) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// max |shell sum from block statistics − brute force over ordered tuples|
/// on an n×n square, plus the statistics themselves.
pub fn shell_oracle_discrepancy(side: usize, order: usize, replicas: usize, beta: f64) -> Result<(f64, super::blocks::BlockStatistics)> {
    let region = LatticeRegion::square(side)?;
    let avg = DisorderAverager::monte_carlo(&region, replicas, SEED)?;
    let series = PlusMinusSeries::expand(&region, params(beta), &avg, order)?;
    let stats = block_statistics_from(&region, side, &series, None)?;
    let probe = ScalePartition::new(side)?;
    let mut brute = vec![0.0; stats.shells.len()];
    let sites = region.sites();
    let mut tuple = Vec::with_capacity(order);
    fn visit(k: usize, sites: &[Site], tuple: &mut Vec<Site>, f: &mut dyn FnMut(&[Site])) {
        if tuple.len() == k {
            f(tuple);
            return;
        }
        for &s in sites {
            tuple.push(s);
            visit(k, sites, tuple, f);
            tuple.pop();
        }
    }
    for k in 1..=order {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let mut err = None;
        visit(k, sites, &mut tuple, &mut |t| {
            let d = match tuple_diameter(t) {
                Ok(d) => f64::from(d),
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            let mut shell = 1;
            while probe.scale_length(shell) <= d {
                shell += 1;
            }
            let p = series.plus.rho(t).expect("tuple covered").value;
            let m = series.minus.rho(t).expect("tuple covered").value;
            brute[shell - 1] += (p * p + m * m) / fact;
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    let worst = stats.shells.iter().zip(&brute).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((worst, stats))
}

fn partition_checks() -> Result<Vec<CheckReport>> {
    let sixteen = ScalePartition::new(16)?;
    let (shell_err, stats) = shell_oracle_discrepancy(4, 3, 100, 1.0)?;
    let total: f64 = stats.shells.iter().sum();
    let bad = (stats.blocks.len() - stats.good_count) as f64;
    Ok(vec![
        CheckReport::holds("partition.invariants", "n = 3..=1000000, every scale", partition_invariant_failure(3..=1_000_000)?.is_none()),
        CheckReport::close("partition.levels_16", "n = 16", sixteen.levels as f64, 2.0, 0.0),
        CheckReport::close("partition.levels_3", "n = 3", ScalePartition::new(3)?.levels as f64, 6.0, 0.0),
        CheckReport::at_most("partition.shell_oracle", "4x4, beta 1, k <= 3, 100 replicas", shell_err, 1e-10),
        CheckReport::at_most("partition.shell_total", "4x4, beta 1, k <= 3: sum s_i vs 2 beta^2 v |Lambda|", total, 32.0),
        CheckReport::at_most("partition.bad_blocks", "4x4, beta 1, k <= 3", bad, stats.partition.bad_block_bound()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_selector_lists_valid_names() {
        let err = lemma_suite("nope").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nope") && msg.contains("decoupling") && msg.contains("all"));
    }

    #[test]
    fn central_differences_recover_cumulants() {
        let region = LatticeRegion::square(2).unwrap();
        assert!(cumulant_derivative_error(&region, 1, params(0.7), 2, 1e-3).unwrap() < 1e-6);
    }
}
