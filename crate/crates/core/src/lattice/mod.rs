//! Synthetic data: Volterra dislocations on punctured grids, Burgers circuits,
//! cut-and-project quasicrystals and seeded random configurations.

mod burgers;
mod dislocation;
mod quasicrystal;
mod random;

pub use burgers::{burgers_circuit, burgers_of_configuration, Circulation};
pub use dislocation::{grid_ring, make_dislocated, Dislocation, DislocationKind, DislocationSpec};
pub use quasicrystal::{
    cut_and_project, split_burgers, BurgersSplit, CutProjectSpec, ProjectionFrame, QuasicrystalPoints, Window,
};
pub use random::{random_affine, random_base, random_body, random_configuration, random_linear, random_plastic_field};
