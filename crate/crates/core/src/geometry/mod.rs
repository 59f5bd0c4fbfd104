//! Points, small matrices, the reference mesh and displacements of space.

mod body;
mod diffeo;
mod linalg;

pub(crate) use body::bounding_diameter;
pub use body::{Facet, SimplicialBody, DEFAULT_DEGENERACY};
pub use diffeo::{AffineMap, SpaceDiffeo, UserDiffeo, TANGENT_CHECK_TOLERANCE};
pub use linalg::{LinearMap, Vector, MAX_DIM};
