use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::SpinSystem;

/// P(σ_x = +1 | rest) = 1/(1 + e^{−2βℓ}).
#[inline]
pub fn heatbath_threshold(beta: f64, local_field: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * beta * local_field).exp())
}

/// Single-site heat-bath dynamics for a compiled system at fixed β.
#[derive(Clone, Debug)]
pub struct HeatBath {
    system: SpinSystem,
    beta: f64,
}

impl HeatBath {
    pub fn new(system: SpinSystem, beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("heat-bath dynamics needs finite beta ≥ 0, got {beta}")));
        }
        Ok(Self { system, beta })
    }

    pub fn system(&self) -> &SpinSystem {
        &self.system
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.system.len()
    }

    pub fn is_empty(&self) -> bool {
        self.system.is_empty()
    }

    /// σ_i ← +1 iff u < threshold(ℓ_i).
    #[inline]
    pub fn update(&self, spins: &mut [i8], i: usize, u: f64) {
        let p = heatbath_threshold(self.beta, self.system.local_field(spins, i));
        spins[i] = if u < p { 1 } else { -1 };
    }

    /// One raster sweep drawing one uniform per site from `rng`.
    pub fn sweep<R: Rng>(&self, spins: &mut [i8], rng: &mut R) {
        for i in 0..self.len() {
            let u: f64 = rng.random();
            self.update(spins, i, u);
        }
    }
}

/// Two copies of the dynamics driven by the same uniforms, started from the
/// all-plus and all-minus configurations.
#[derive(Clone, Debug)]
pub struct CoupledChainPair<'a> {
    dynamics: &'a HeatBath,
    pub upper: Vec<i8>,
    pub lower: Vec<i8>,
    sweeps: u64,
}

impl<'a> CoupledChainPair<'a> {
    pub fn new(dynamics: &'a HeatBath) -> Self {
        Self::from_states(dynamics, vec![1; dynamics.len()], vec![-1; dynamics.len()])
    }

    pub fn from_states(dynamics: &'a HeatBath, upper: Vec<i8>, lower: Vec<i8>) -> Self {
        Self { dynamics, upper, lower, sweeps: 0 }
    }

    pub fn update(&mut self, i: usize, u: f64) {
        self.dynamics.update(&mut self.upper, i, u);
        self.dynamics.update(&mut self.lower, i, u);
    }

    pub fn sweep<R: Rng>(&mut self, rng: &mut R) {
        for i in 0..self.dynamics.len() {
            let u: f64 = rng.random();
            self.update(i, u);
        }
        self.sweeps += 1;
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn is_ordered(&self) -> bool {
        self.upper.iter().zip(&self.lower).all(|(u, l)| u >= l)
    }

    pub fn has_coalesced(&self) -> bool {
        self.upper == self.lower
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert_eq!(heatbath_threshold(0.0, 3.7), 0.5);
        assert!((heatbath_threshold(1.0, 4.0) - 0.9996646498695335).abs() < 1e-15);
        let mut last = 0.0;
        for k in -80..=80 {
            let p = heatbath_threshold(0.9, f64::from(k) * 0.1);
            assert!(p >= last);
            last = p;
        }
    }
}
