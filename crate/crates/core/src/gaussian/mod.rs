//! Disorder-side analysis: Gaussian averages of free-energy derivatives,
//! their Hermite (Parseval) series, the Poincaré bound and the Taylor
//! expansion in a block shift.

mod averager;
mod functional;
mod series;

pub use averager::{
    gauss_hermite_rule, AveragerMode, DisorderAverager, Estimate, NodeSample, DEFAULT_QUADRATURE_ORDER, MAX_QUADRATURE_ORDER,
    MAX_QUADRATURE_PROBES,
};
pub use functional::{FreeEnergyFunctional, GaussianFunctional, LinearFunctional};
pub use series::{
    block_taylor_check, functional_variance_check, order_cap, poincare_check, rho, tuple_diameter, variance_identity_check, HermiteSeries,
    PoincareReport, TaylorReport, VarianceReport, MULTI_SITE_ORDER_CAP, SINGLE_SITE_ORDER_CAP,
};
