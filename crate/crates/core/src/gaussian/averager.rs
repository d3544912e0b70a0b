use gauss_quad::GaussHermite;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::num::NonZeroUsize;

use crate::error::{Error, Result};
use crate::model::{LatticeRegion, Site};
use crate::rng::site_gaussian;

pub const MAX_QUADRATURE_PROBES: usize = 4;
pub const MAX_QUADRATURE_ORDER: usize = 64;
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

/// A disorder average with its standard error (zero for quadrature).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragerMode {
    /// Tensor Gauss–Hermite rule over the probe sites; all other sites are
    /// frozen.
    Quadrature { order: usize },
    /// Independent replicas of the full disorder.
    MonteCarlo { replicas: usize, seed: u64 },
}

/// Nodes and weights for E over a standard Gaussian: g = √2·x, w/√π.
pub fn gauss_hermite_rule(order: usize) -> Result<Vec<(f64, f64)>> {
    if order == 0 || order > MAX_QUADRATURE_ORDER {
        return Err(Error::InvalidParameter(format!("quadrature order must be in 1..={MAX_QUADRATURE_ORDER}, got {order}")));
    }
    let rule = GaussHermite::new(NonZeroUsize::new(order).expect("nonzero"));
    let scale = std::f64::consts::PI.sqrt().recip();
    let mut nodes: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (std::f64::consts::SQRT_2 * x, w * scale)).collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(nodes)
}

/// Expectation over the random field configuration g ∈ R^Λ.
#[derive(Clone, Debug)]
pub struct DisorderAverager {
    mode: AveragerMode,
    sites: Vec<Site>,
    base: Vec<f64>,
    coordinates: Vec<usize>,
    rule: Vec<(f64, f64)>,
}

/// Functional values at every node, in node order, with their weights.
#[derive(Clone, Debug)]
pub struct NodeSample<T> {
    deterministic: bool,
    nodes: Vec<(f64, T)>,
}

impl DisorderAverager {
    /// Integrates g over `probes` with an `order`-point rule per site and
    /// holds every other site at `frozen`.
    pub fn quadrature(region: &LatticeRegion, probes: &[Site], frozen: &[f64], order: usize) -> Result<Self> {
        if probes.len() > MAX_QUADRATURE_PROBES {
            return Err(Error::TooManyProbes { given: probes.len(), cap: MAX_QUADRATURE_PROBES });
        }
        if frozen.len() != region.len() {
            return Err(Error::DomainMismatch(format!("{} frozen values for {} sites", frozen.len(), region.len())));
        }
        let coordinates: Vec<usize> = probes.iter().map(|&s| region.require_index(s)).collect::<Result<_>>()?;
        let mut sorted = coordinates.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != coordinates.len() {
            return Err(Error::InvalidParameter("probe sites must be distinct".into()));
        }
        Ok(Self {
            mode: AveragerMode::Quadrature { order },
            sites: region.sites().to_vec(),
            base: frozen.to_vec(),
            coordinates,
            rule: gauss_hermite_rule(order)?,
        })
    }

    /// Quadrature over `probes` with the remaining sites frozen at 0.
    pub fn quadrature_at_zero(region: &LatticeRegion, probes: &[Site]) -> Result<Self> {
        Self::quadrature(region, probes, &vec![0.0; region.len()], DEFAULT_QUADRATURE_ORDER)
    }

    /// `replicas` counter-based disorder draws over the whole region.
    pub fn monte_carlo(region: &LatticeRegion, replicas: usize, seed: u64) -> Result<Self> {
        if replicas < 2 {
            return Err(Error::InvalidParameter("Monte Carlo averaging needs at least 2 replicas".into()));
        }
        Ok(Self {
            mode: AveragerMode::MonteCarlo { replicas, seed },
            sites: region.sites().to_vec(),
            base: vec![0.0; region.len()],
            coordinates: (0..region.len()).collect(),
            rule: Vec::new(),
        })
    }

    pub fn mode(&self) -> AveragerMode {
        self.mode
    }

    /// Region indices of the sites whose field is random.
    pub fn coordinates(&self) -> &[usize] {
        &self.coordinates
    }

    pub fn coordinate_sites(&self) -> Vec<Site> {
        self.coordinates.iter().map(|&i| self.sites[i]).collect()
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.mode, AveragerMode::Quadrature { .. })
    }

    /// Number of nodes (quadrature points or replicas).
    pub fn len(&self) -> usize {
        match self.mode {
            AveragerMode::Quadrature { order } => order.pow(self.coordinates.len() as u32),
            AveragerMode::MonteCarlo { replicas, .. } => replicas,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes node `i` into `g` and returns its weight.
    pub fn node(&self, i: usize, g: &mut [f64]) -> f64 {
        match self.mode {
            AveragerMode::Quadrature { order } => {
                let mut rest = i;
                let mut weight = 1.0;
                for &c in &self.coordinates {
                    let (x, w) = self.rule[rest % order];
                    rest /= order;
                    g[c] = x;
                    weight *= w;
                }
                weight
            }
            AveragerMode::MonteCarlo { replicas, seed } => {
                for (gx, &site) in g.iter_mut().zip(&self.sites) {
                    *gx = site_gaussian(seed, i as u64, site);
                }
                1.0 / replicas as f64
            }
        }
    }

    /// Evaluates `f` at every node in parallel; results keep node order.
    pub fn sample<T, F>(&self, f: F) -> Result<NodeSample<T>>
    where
        T: Send,
        F: Fn(&[f64]) -> Result<T> + Sync,
    {
        let nodes = (0..self.len())
            .into_par_iter()
            .map_init(
                || self.base.clone(),
                |g, i| {
                    let w = self.node(i, g);
                    f(g).map(|v| (w, v))
                },
            )
            .collect::<Result<Vec<_>>>()?;
        Ok(NodeSample { deterministic: self.is_deterministic(), nodes })
    }

    pub fn average<F>(&self, f: F) -> Result<Vec<Estimate>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    {
        Ok(self.sample(f)?.means())
    }

    pub fn average_scalar<F>(&self, f: F) -> Result<Estimate>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        Ok(self.sample(f)?.mean_by(|v| *v))
    }

    pub fn variance<F>(&self, f: F) -> Result<Estimate>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        Ok(self.sample(f)?.variance_by(|v| *v))
    }
}

impl<T> NodeSample<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.nodes.iter().map(|(_, v)| v)
    }

    pub fn mean_by(&self, key: impl Fn(&T) -> f64) -> Estimate {
        let mean: f64 = self.nodes.iter().map(|(w, v)| w * key(v)).sum();
        let std_error = if self.deterministic {
            0.0
        } else {
            let n = self.nodes.len() as f64;
            let ss: f64 = self.nodes.iter().map(|(_, v)| (key(v) - mean).powi(2)).sum();
            (ss / (n * (n - 1.0))).sqrt()
        };
        Estimate { value: mean, std_error }
    }

    /// Var of `key`, two-pass. The Monte Carlo error uses the fourth
    /// central moment.
    pub fn variance_by(&self, key: impl Fn(&T) -> f64) -> Estimate {
        let first = self.nodes.first().map(|(_, v)| key(v));
        if self.nodes.iter().all(|(_, v)| Some(key(v)) == first) {
            return Estimate { value: 0.0, std_error: 0.0 };
        }
        let mean = self.mean_by(&key).value;
        if self.deterministic {
            let value = self.nodes.iter().map(|(w, v)| w * (key(v) - mean).powi(2)).sum();
            return Estimate { value, std_error: 0.0 };
        }
        let n = self.nodes.len() as f64;
        let m2: f64 = self.nodes.iter().map(|(_, v)| (key(v) - mean).powi(2)).sum::<f64>() / n;
        let m4: f64 = self.nodes.iter().map(|(_, v)| (key(v) - mean).powi(4)).sum::<f64>() / n;
        Estimate { value: m2 * n / (n - 1.0), std_error: ((m4 - m2 * m2).max(0.0) / n).sqrt() }
    }
}

impl NodeSample<Vec<f64>> {
    /// Per-component means in a fixed summation order.
    pub fn means(&self) -> Vec<Estimate> {
        let width = self.nodes.first().map_or(0, |(_, v)| v.len());
        let mut sum = vec![0.0; width];
        for (w, v) in &self.nodes {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += w * x;
            }
        }
        let mut se = vec![0.0; width];
        if !self.deterministic {
            let n = self.nodes.len() as f64;
            for (_, v) in &self.nodes {
                for ((s, x), m) in se.iter_mut().zip(v).zip(&sum) {
                    *s += (x - m).powi(2);
                }
            }
            se.iter_mut().for_each(|s| *s = (*s / (n * (n - 1.0))).sqrt());
        }
        sum.into_iter().zip(se).map(|(value, std_error)| Estimate { value, std_error }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_reproduces_low_moments() {
        for order in [8, 32, 64] {
            let rule = gauss_hermite_rule(order).unwrap();
            let m = |p: i32| rule.iter().map(|(x, w)| w * x.powi(p)).sum::<f64>();
            assert!((m(0) - 1.0).abs() < 1e-12);
            assert!(m(1).abs() < 1e-12);
            assert!((m(2) - 1.0).abs() < 1e-12);
            assert!((m(4) - 3.0).abs() < 1e-11);
        }
        assert!(gauss_hermite_rule(65).is_err());
    }

    #[test]
    fn simple_functionals() {
        let region = LatticeRegion::square(1).unwrap();
        let avg = DisorderAverager::quadrature_at_zero(&region, region.sites()).unwrap();
        let odd = avg.average_scalar(|g| Ok(g[0])).unwrap();
        assert!(odd.value.abs() < 1e-12 && odd.std_error == 0.0);
        let even = avg.average_scalar(|g| Ok(g[0] * g[0])).unwrap();
        assert!((even.value - 1.0).abs() < 1e-12);
        let lc = avg.average_scalar(|g| Ok((2.0 * g[0].cosh()).ln())).unwrap();
        assert!((lc.value - 1.0677143880514197).abs() < 1e-10);
    }

    #[test]
    fn probe_cap() {
        let region = LatticeRegion::square(3).unwrap();
        let err = DisorderAverager::quadrature_at_zero(&region, &region.sites()[..5]).unwrap_err();
        assert!(matches!(err, Error::TooManyProbes { given: 5, cap: 4 }));
    }

    #[test]
    fn tensor_rule_factorizes() {
        let region = LatticeRegion::square(2).unwrap();
        let probes = &region.sites()[..2];
        let avg = DisorderAverager::quadrature(&region, probes, &[0.0, 0.0, 0.7, -0.2], 16).unwrap();
        let e = avg.average(|g| Ok(vec![g[0] * g[0] * g[1] * g[1], g[2], g[3]])).unwrap();
        assert!((e[0].value - 1.0).abs() < 1e-12);
        assert!((e[1].value - 0.7).abs() < 1e-12);
        assert!((e[2].value + 0.2).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let region = LatticeRegion::square(2).unwrap();
        let avg = DisorderAverager::monte_carlo(&region, 4000, 3).unwrap();
        let a = avg.average_scalar(|g| Ok(g.iter().sum())).unwrap();
        let b = avg.average_scalar(|g| Ok(g.iter().sum())).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert!(a.value.abs() < 4.0 * a.std_error);
        let var = avg.variance(|g| Ok(g.iter().sum())).unwrap();
        assert!((var.value - 4.0).abs() < 4.0 * var.std_error);
    }
}
