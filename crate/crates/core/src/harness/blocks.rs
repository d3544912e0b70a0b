use serde::{Deserialize, Serialize};

use super::partition::ScalePartition;
use crate::error::{Error, Result};
use crate::gaussian::{DisorderAverager, FreeEnergyFunctional, HermiteSeries};
use crate::model::{Block, BlockShift, BoundaryCondition, LatticeRegion, ModelParams, Site};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockStat {
    pub block: Block,
    /// Tuples in B with diameter < m_{i−1}.
    pub s0: f64,
    /// Tuples in B with m_{i−1} ≤ diameter < m_i.
    pub s1: f64,
    pub good: bool,
}

/// Block statistics with all sums truncated at `truncation_order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockStatistics {
    pub truncation_order: usize,
    /// `shells[i − 1]` = s_i, for every shell reached by a tuple diameter.
    pub shells: Vec<f64>,
    pub partition: ScalePartition,
    pub blocks: Vec<BlockStat>,
    pub s0_mean: f64,
    pub s1_mean: f64,
    pub good_count: usize,
}

/// ρ₊ and ρ₋ over every tuple of Λ, as Hermite series of F±.
#[derive(Clone, Debug)]
pub struct PlusMinusSeries {
    pub plus: HermiteSeries,
    pub minus: HermiteSeries,
}

impl PlusMinusSeries {
    pub fn expand(region: &LatticeRegion, params: ModelParams, averager: &DisorderAverager, order: usize) -> Result<Self> {
        let expand = |gamma: BoundaryCondition| -> Result<HermiteSeries> {
            let f = FreeEnergyFunctional::new(region, &gamma, params, BlockShift::none())?;
            HermiteSeries::expand(averager, &f, order)
        };
        Ok(Self { plus: expand(BoundaryCondition::all_plus(region))?, minus: expand(BoundaryCondition::all_minus(region))? })
    }

    /// (1/ν!)(ρ₊² + ρ₋²) with the support of every multiset.
    fn weighted_terms(&self) -> impl Iterator<Item = (Vec<Site>, f64)> + '_ {
        let plan = self.plus.plan();
        let sites = self.plus.sites();
        (0..plan.len()).map(move |i| {
            let support: Vec<Site> = plan.multiset(i).iter().zip(sites).filter(|(c, _)| **c > 0).map(|(_, s)| *s).collect();
            let (p, m) = (self.plus.coefficients()[i].value, self.minus.coefficients()[i].value);
            (support, plan.inverse_multiplicity_factorial(i) * (p * p + m * m))
        })
    }
}

fn diameter(support: &[Site]) -> f64 {
    let mut d = 0;
    for (i, a) in support.iter().enumerate() {
        for b in &support[i + 1..] {
            d = d.max(a.linf_distance(*b));
        }
    }
    f64::from(d)
}

/// Shell index i with m_{i−1} ≤ d < m_i.
fn shell_of(partition: &ScalePartition, d: f64) -> usize {
    let mut i = 1;
    while partition.scale_length(i) <= d {
        i += 1;
    }
    i
}

/// s_i, s₀(B), s₁(B) and the good set 𝓑₀ for an n×n square region, from
/// ρ± estimated by `averager` up to `truncation_order`. The scale is the
/// first admissible one unless `scale` is given.
pub fn block_statistics(
    region: &LatticeRegion,
    params: ModelParams,
    averager: &DisorderAverager,
    truncation_order: usize,
    scale: Option<usize>,
) -> Result<BlockStatistics> {
    let n = region.square_side().ok_or_else(|| Error::InvalidParameter("block statistics need a square region".into()))?;
    if averager.coordinates().len() != region.len() {
        return Err(Error::InvalidParameter("block statistics need the disorder of every site to be random".into()));
    }
    let series = PlusMinusSeries::expand(region, params, averager, truncation_order)?;
    block_statistics_from(region, n, &series, scale)
}

pub fn block_statistics_from(region: &LatticeRegion, n: usize, series: &PlusMinusSeries, scale: Option<usize>) -> Result<BlockStatistics> {
    let probe = ScalePartition::new(n)?;
    let terms: Vec<(Vec<Site>, f64, usize)> = series.weighted_terms().map(|(s, w)| {
        let shell = shell_of(&probe, diameter(&s));
        (s, w, shell)
    }).collect();
    let shell_count = terms.iter().map(|t| t.2).max().unwrap_or(1);
    let mut shells = vec![0.0; shell_count];
    for (_, w, shell) in &terms {
        shells[shell - 1] += w;
    }
    let partition = match scale {
        Some(i) => ScalePartition::with_scale(n, i)?,
        None => ScalePartition::select(n, &shells)?,
    };
    let origin = region.rect().expect("square region").origin;
    let i = partition.scale;
    let mut blocks: Vec<BlockStat> = partition.blocks(origin).map(|block| BlockStat { block, s0: 0.0, s1: 0.0, good: false }).collect();
    let per_side = partition.blocks_per_side();
    for (support, w, shell) in &terms {
        let Some(block) = partition.block_of(origin, support[0]) else { continue };
        if !support.iter().all(|&s| block.contains(s)) {
            continue;
        }
        let bx = ((block.origin.x - origin.x) as usize) / partition.m;
        let by = ((block.origin.y - origin.y) as usize) / partition.m;
        let stat = &mut blocks[bx * per_side + by];
        if *shell < i {
            stat.s0 += w;
        } else if *shell == i {
            stat.s1 += w;
        }
    }
    let count = blocks.len() as f64;
    let s0_mean = blocks.iter().map(|b| b.s0).sum::<f64>() / count;
    let s1_mean = blocks.iter().map(|b| b.s1).sum::<f64>() / count;
    let k2 = partition.threshold.powi(2);
    for b in &mut blocks {
        b.good = b.s1 <= k2 * s1_mean && b.s0 <= k2 * s0_mean;
    }
    let good_count = blocks.iter().filter(|b| b.good).count();
    Ok(BlockStatistics { truncation_order: series.plus.max_order(), shells, partition, blocks, s0_mean, s1_mean, good_count })
}
