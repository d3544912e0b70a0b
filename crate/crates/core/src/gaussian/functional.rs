use crate::error::{Error, Result};
use crate::exact::{CumulantPlan, ExactEngine, SpinSystem};
use crate::model::{BlockShift, BoundaryCondition, LatticeRegion, ModelParams};

/// A smooth function of the standardized field g ∈ R^Λ.
pub trait GaussianFunctional: Sync {
    fn value(&self, g: &[f64]) -> Result<f64>;

    /// Returns f(g) and writes ∂^ν f(g) into `out` for every multiset ν of
    /// `plan` over the coordinates `coords`.
    fn derivatives(&self, g: &[f64], coords: &[usize], plan: &CumulantPlan, out: &mut [f64]) -> Result<f64>;
}

/// F(g) = log Z for a fixed region, boundary, parameters and block shift.
///
/// Its mixed g-derivatives are (β√v)^k times the joint spin cumulants.
#[derive(Clone, Debug)]
pub struct FreeEnergyFunctional {
    template: SpinSystem,
    boundary_bias: Vec<f64>,
    shift_mask: Vec<f64>,
    params: ModelParams,
    engine: ExactEngine,
}

impl FreeEnergyFunctional {
    pub fn new(region: &LatticeRegion, boundary: &BoundaryCondition, params: ModelParams, shift: BlockShift) -> Result<Self> {
        if params.beta().is_infinite() {
            return Err(Error::InfiniteBeta);
        }
        if let Some(block) = &shift.block {
            if !region.contains_block(block) {
                return Err(Error::BlockOutsideRegion);
            }
        }
        let template = SpinSystem::from_region(region, boundary, &vec![0.0; region.len()])?;
        let shift_mask = region.sites().iter().map(|&s| if shift.applies_to(s) { shift.h } else { 0.0 }).collect();
        Ok(Self { boundary_bias: template.bias().to_vec(), template, shift_mask, params, engine: ExactEngine::default() })
    }

    pub fn with_engine(mut self, engine: ExactEngine) -> Self {
        self.engine = engine;
        self
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// The compiled system at disorder `g`.
    pub fn system(&self, g: &[f64]) -> SpinSystem {
        let sqrt_v = self.params.sqrt_v();
        let bias = self.boundary_bias.iter().zip(g).zip(&self.shift_mask).map(|((b, g), h)| b + sqrt_v * (g + h)).collect();
        self.template.with_bias(bias)
    }
}

impl GaussianFunctional for FreeEnergyFunctional {
    fn value(&self, g: &[f64]) -> Result<f64> {
        self.engine.free_energy(&self.system(g), self.params.beta())
    }

    fn derivatives(&self, g: &[f64], coords: &[usize], plan: &CumulantPlan, out: &mut [f64]) -> Result<f64> {
        let system = self.system(g);
        let beta = self.params.beta();
        let engine = ExactEngine { cumulant_cap: self.engine.cumulant_cap.max(plan.max_order()), ..self.engine };
        engine.cumulants_into(&system, beta, coords, plan, out)?;
        let scale = beta * self.params.sqrt_v();
        for (i, d) in out.iter_mut().enumerate() {
            *d *= scale.powi(plan.order(i) as i32);
        }
        engine.free_energy(&system, beta)
    }
}

/// f(g) = Σ_x a_x g_x.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFunctional {
    pub coefficients: Vec<f64>,
}

impl GaussianFunctional for LinearFunctional {
    fn value(&self, g: &[f64]) -> Result<f64> {
        Ok(self.coefficients.iter().zip(g).map(|(a, g)| a * g).sum())
    }

    fn derivatives(&self, g: &[f64], coords: &[usize], plan: &CumulantPlan, out: &mut [f64]) -> Result<f64> {
        out.iter_mut().for_each(|d| *d = 0.0);
        for (pos, &c) in coords.iter().enumerate() {
            let mut e = vec![0u8; coords.len()];
            e[pos] = 1;
            if let Some(i) = plan.index_of(&e) {
                out[i] = self.coefficients[c];
            }
        }
        self.value(g)
    }
}
