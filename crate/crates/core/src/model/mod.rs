//! Lattice geometry, spins, boundary conditions, disorder and the energy
//! function of the random field Ising model on a finite Λ ⊂ Z².

mod disorder;
mod energy;
mod region;
mod spins;

pub use disorder::{effective_field, BlockShift, DisorderRealization, DisorderSource, ModelParams};
pub use energy::hamiltonian;
pub use region::{Block, LatticeRegion, Rect, Site};
pub use spins::{BoundaryCondition, SpinConfiguration};
