use serde::{Deserialize, Serialize};

use super::averager::{DisorderAverager, Estimate};
use super::functional::{FreeEnergyFunctional, GaussianFunctional};
use crate::error::{Error, Result};
use crate::exact::CumulantPlan;
use crate::model::{Block, BlockShift, BoundaryCondition, LatticeRegion, ModelParams, Site};

/// Highest expansion order for a single random coordinate.
pub const SINGLE_SITE_ORDER_CAP: usize = 12;
/// Highest expansion order with two or more random coordinates.
pub const MULTI_SITE_ORDER_CAP: usize = 6;

pub fn order_cap(coordinates: usize) -> usize {
    if coordinates <= 1 {
        SINGLE_SITE_ORDER_CAP
    } else {
        MULTI_SITE_ORDER_CAP
    }
}

fn check_order(coordinates: usize, order: usize) -> Result<()> {
    let cap = order_cap(coordinates);
    if order == 0 || order > cap {
        return Err(Error::CumulantOrder { order, cap });
    }
    Ok(())
}

/// Disorder averages ρ(x₁..x_k) = E[∂^k f / ∂g_{x₁}…∂g_{x_k}] over the
/// averager's random coordinates, with the Parseval partial sums
/// Σ_{j≤k} (1/j!) Σ_{tuples} ρ².
#[derive(Clone, Debug)]
pub struct HermiteSeries {
    sites: Vec<Site>,
    plan: CumulantPlan,
    rho: Vec<Estimate>,
    order_sums: Vec<f64>,
    partial_sums: Vec<f64>,
    variance: Estimate,
    mean: Estimate,
}

impl HermiteSeries {
    /// Expands `functional` up to `max_order` over the random coordinates of
    /// `averager`. Var(f) is computed from the same nodes directly.
    pub fn expand(averager: &DisorderAverager, functional: &dyn GaussianFunctional, max_order: usize) -> Result<Self> {
        let coords = averager.coordinates().to_vec();
        check_order(coords.len(), max_order)?;
        let plan = CumulantPlan::new(coords.len(), max_order);
        let sample = averager.sample(|g| {
            let mut d = vec![0.0; plan.len()];
            let value = functional.derivatives(g, &coords, &plan, &mut d)?;
            Ok((value, d))
        })?;
        let variance = sample.variance_by(|(v, _)| *v);
        let mean = sample.mean_by(|(v, _)| *v);
        let rho: Vec<Estimate> = (0..plan.len()).map(|i| sample.mean_by(|(_, d)| d[i])).collect();
        let mut order_sums = vec![0.0; max_order];
        for (i, r) in rho.iter().enumerate() {
            order_sums[plan.order(i) - 1] += plan.inverse_multiplicity_factorial(i) * r.value * r.value;
        }
        let partial_sums = order_sums
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect();
        Ok(Self { sites: averager.coordinate_sites(), plan, rho, order_sums, partial_sums, variance, mean })
    }

    pub fn max_order(&self) -> usize {
        self.plan.max_order()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn plan(&self) -> &CumulantPlan {
        &self.plan
    }

    /// ρ for a tuple of random sites (any order, repeats allowed).
    pub fn rho(&self, tuple: &[Site]) -> Option<Estimate> {
        let positions: Option<Vec<usize>> = tuple.iter().map(|s| self.sites.iter().position(|t| t == s)).collect();
        self.plan.index_of_tuple(&positions?).map(|i| self.rho[i])
    }

    /// ρ per multiset, in plan order.
    pub fn coefficients(&self) -> &[Estimate] {
        &self.rho
    }

    /// (1/k!) Σ_{k-tuples} ρ² for k = 1..=max_order.
    pub fn order_sums(&self) -> &[f64] {
        &self.order_sums
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    /// Var(f) over the same nodes.
    pub fn variance(&self) -> Estimate {
        self.variance
    }

    pub fn mean(&self) -> Estimate {
        self.mean
    }
}

/// ℓ∞ diameter of a tuple of sites.
pub fn tuple_diameter(tuple: &[Site]) -> Result<u32> {
    if tuple.is_empty() {
        return Err(Error::EmptyTuple);
    }
    let mut d = 0;
    for (i, a) in tuple.iter().enumerate() {
        for b in &tuple[i + 1..] {
            d = d.max(a.linf_distance(*b));
        }
    }
    Ok(d)
}

/// ρ_γ(x₁..x_k) for the free energy of `region`.
pub fn rho(region: &LatticeRegion, boundary: &BoundaryCondition, params: ModelParams, tuple: &[Site], averager: &DisorderAverager) -> Result<Estimate> {
    if tuple.is_empty() {
        return Err(Error::EmptyTuple);
    }
    let mut distinct = tuple.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    check_order(distinct.len(), tuple.len())?;
    let coords: Vec<usize> = distinct.iter().map(|&s| region.require_index(s)).collect::<Result<_>>()?;
    let functional = FreeEnergyFunctional::new(region, boundary, params, BlockShift::none())?;
    let plan = CumulantPlan::new(distinct.len(), tuple.len());
    let positions: Vec<usize> = tuple.iter().map(|s| distinct.binary_search(s).expect("present")).collect();
    let entry = plan.index_of_tuple(&positions).expect("within plan");
    averager.average_scalar(|g| {
        let mut d = vec![0.0; plan.len()];
        functional.derivatives(g, &coords, &plan, &mut d)?;
        Ok(d[entry])
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub variance: Estimate,
    pub partial_sums: Vec<f64>,
    /// Var − last partial sum.
    pub residual: f64,
    pub monotone: bool,
}

impl VarianceReport {
    fn from_series(series: &HermiteSeries) -> Self {
        let partial_sums = series.partial_sums().to_vec();
        let last = partial_sums.last().copied().unwrap_or(0.0);
        let monotone = partial_sums.windows(2).all(|w| w[0] <= w[1]);
        Self { variance: series.variance(), residual: series.variance().value - last, partial_sums, monotone }
    }
}

/// Var(F) against its Hermite partial sums through `max_order`.
pub fn variance_identity_check(
    region: &LatticeRegion,
    boundary: &BoundaryCondition,
    params: ModelParams,
    shift: BlockShift,
    averager: &DisorderAverager,
    max_order: usize,
) -> Result<(VarianceReport, HermiteSeries)> {
    let functional = FreeEnergyFunctional::new(region, boundary, params, shift)?;
    let series = HermiteSeries::expand(averager, &functional, max_order)?;
    Ok((VarianceReport::from_series(&series), series))
}

/// The same comparison for an arbitrary functional.
pub fn functional_variance_check(averager: &DisorderAverager, functional: &dyn GaussianFunctional, max_order: usize) -> Result<VarianceReport> {
    Ok(VarianceReport::from_series(&HermiteSeries::expand(averager, functional, max_order)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub variance: Estimate,
    /// β²v|Λ|.
    pub bound: f64,
    /// bound − (Var − 3 SE).
    pub slack: f64,
    pub pass: bool,
}

pub fn poincare_check(region: &LatticeRegion, boundary: &BoundaryCondition, params: ModelParams, averager: &DisorderAverager) -> Result<PoincareReport> {
    let functional = FreeEnergyFunctional::new(region, boundary, params, BlockShift::none())?;
    let variance = averager.variance(|g| functional.value(g))?;
    let bound = params.beta().powi(2) * params.v() * region.len() as f64;
    let slack = bound - (variance.value - 3.0 * variance.std_error);
    Ok(PoincareReport { variance, bound, slack, pass: slack >= 0.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    /// E[F(h) − F(0)].
    pub lhs: Estimate,
    /// E F^{(k)}(0) for k = 1..=max_order.
    pub derivatives: Vec<f64>,
    /// Σ_{j≤k} h^j/j! · E F^{(j)}(0).
    pub partial_sums: Vec<f64>,
    /// |lhs − partial sum|.
    pub residuals: Vec<f64>,
}

/// E[F(h) − F(0)] against its Taylor polynomials in the block shift h,
/// using E F^{(k)}(0) = Σ_{x₁..x_k ∈ B} ρ(x₁..x_k).
pub fn block_taylor_check(
    region: &LatticeRegion,
    block: Block,
    boundary: &BoundaryCondition,
    params: ModelParams,
    h: f64,
    max_order: usize,
    averager: &DisorderAverager,
) -> Result<TaylorReport> {
    if !region.contains_block(&block) {
        return Err(Error::BlockOutsideRegion);
    }
    let block_sites: Vec<usize> = block.sites().map(|s| region.require_index(s)).collect::<Result<_>>()?;
    check_order(block_sites.len(), max_order)?;
    let base = FreeEnergyFunctional::new(region, boundary, params, BlockShift::none())?;
    let shifted = FreeEnergyFunctional::new(region, boundary, params, BlockShift::new(block, h))?;
    let plan = CumulantPlan::new(block_sites.len(), max_order);
    let sample = averager.sample(|g| {
        let mut d = vec![0.0; plan.len()];
        let f0 = base.derivatives(g, &block_sites, &plan, &mut d)?;
        let mut by_order = vec![0.0; max_order];
        for (i, x) in d.iter().enumerate() {
            by_order[plan.order(i) - 1] += plan.tuple_count(i) * x;
        }
        // h = 0 is an exact zero even where F itself is large.
        let diff = if h == 0.0 { 0.0 } else { shifted.value(g)? - f0 };
        Ok((diff, by_order))
    })?;
    let lhs = sample.mean_by(|(diff, _)| *diff);
    let derivatives: Vec<f64> = (0..max_order).map(|k| sample.mean_by(|(_, d)| d[k]).value).collect();
    let mut partial_sums = Vec::with_capacity(max_order);
    let mut acc = 0.0;
    let mut coef = 1.0;
    for (k, d) in derivatives.iter().enumerate() {
        coef *= h / (k + 1) as f64;
        acc += coef * d;
        partial_sums.push(acc);
    }
    let residuals = partial_sums.iter().map(|p| (lhs.value - p).abs()).collect();
    Ok(TaylorReport { lhs, derivatives, partial_sums, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::LinearFunctional;

    fn single_site() -> (LatticeRegion, BoundaryCondition, DisorderAverager) {
        let region = LatticeRegion::square(1).unwrap();
        let plus = BoundaryCondition::all_plus(&region);
        let avg = DisorderAverager::quadrature_at_zero(&region, region.sites()).unwrap();
        (region, plus, avg)
    }

    #[test]
    fn single_site_variance_series_converges() {
        let (region, plus, avg) = single_site();
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let (report, series) = variance_identity_check(&region, &plus, params, BlockShift::none(), &avg, 12).unwrap();
        assert!((report.variance.value - 0.990912024066582).abs() < 1e-9);
        assert!(report.monotone);
        assert!(report.residual.abs() < 1e-6, "residual {}", report.residual);
        let rho1 = series.rho(&[Site::new(0, 0)]).unwrap().value;
        assert!((rho1 - 0.995_377_958_274_569_8).abs() < 1e-10);
    }

    #[test]
    fn rho_is_odd_under_boundary_flip() {
        let (region, plus, avg) = single_site();
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let x = [Site::new(0, 0)];
        let p = rho(&region, &plus, params, &x, &avg).unwrap().value;
        let m = rho(&region, &plus.negated(), params, &x, &avg).unwrap().value;
        assert!((p + m).abs() < 1e-12);
        let cold = rho(&region, &plus, ModelParams::new(0.0, 1.0).unwrap(), &[x[0], x[0], x[0]], &avg).unwrap();
        assert_eq!(cold.value, 0.0);
    }

    #[test]
    fn two_probe_variance_matches_at_order_six() {
        let region = LatticeRegion::square(2).unwrap();
        let plus = BoundaryCondition::all_plus(&region);
        let avg = DisorderAverager::quadrature_at_zero(&region, &[Site::new(0, 0), Site::new(0, 1)]).unwrap();
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let (report, _) = variance_identity_check(&region, &plus, params, BlockShift::none(), &avg, 6).unwrap();
        assert!(report.monotone);
        assert!(report.residual.abs() < 1e-4, "residual {}", report.residual);
        assert!(report.residual > -1e-8);
    }

    #[test]
    fn linear_functional_lives_at_first_order() {
        let region = LatticeRegion::square(2).unwrap();
        let avg = DisorderAverager::quadrature_at_zero(&region, &region.sites()[..3]).unwrap_or_else(|e| panic!("{e}"));
        let f = LinearFunctional { coefficients: vec![0.5, -1.5, 2.0, 7.0] };
        let report = functional_variance_check(&avg, &f, 4).unwrap();
        assert!((report.variance.value - 6.5).abs() < 1e-10);
        assert!((report.partial_sums[0] - 6.5).abs() < 1e-10);
        assert!(report.residual.abs() < 1e-10);
    }

    #[test]
    fn single_site_taylor_expansion() {
        let (region, plus, avg) = single_site();
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let block = Block::new(Site::new(0, 0), 1);
        let report = block_taylor_check(&region, block, &plus, params, 0.1, 6, &avg).unwrap();
        assert!((report.lhs.value - 0.09957910859305775).abs() < 1e-10);
        assert!(report.residuals[5] < 1e-6);
        assert!(report.residuals[1..].windows(2).all(|w| w[1] < w[0]));
        let zero = block_taylor_check(&region, block, &plus, params, 0.0, 3, &avg).unwrap();
        assert_eq!(zero.lhs.value, 0.0);
        assert!(zero.partial_sums.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn poincare_single_site() {
        let (region, plus, avg) = single_site();
        let report = poincare_check(&region, &plus, ModelParams::new(1.0, 1.0).unwrap(), &avg).unwrap();
        assert!(report.pass && report.bound == 1.0);
        let cold = poincare_check(&region, &plus, ModelParams::new(0.0, 1.0).unwrap(), &avg).unwrap();
        assert_eq!((cold.variance.value, cold.bound), (0.0, 0.0));
        assert!(cold.pass);
    }

    #[test]
    fn diameters() {
        let s = |x, y| Site::new(x, y);
        assert_eq!(tuple_diameter(&[s(2, 2)]).unwrap(), 0);
        assert_eq!(tuple_diameter(&[s(0, 0), s(3, 1)]).unwrap(), 3);
        assert_eq!(tuple_diameter(&[s(0, 0), s(1, 5), s(4, 2)]).unwrap(), 5);
        assert!(matches!(tuple_diameter(&[]), Err(Error::EmptyTuple)));
    }
}
