//! Exact and Monte Carlo numerics for the two-dimensional random field Ising
//! model, with checks of the identities and inequalities behind its
//! boundary-influence decay.

pub mod decoupling;
pub mod error;
pub mod exact;
pub mod gaussian;
pub mod harness;
pub mod mc;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
pub use exact::{EngineChoice, EngineTag, ExactEngine, QuenchedObservables, SpinSystem};
pub use model::{BoundaryCondition, DisorderRealization, LatticeRegion, ModelParams, Site};
