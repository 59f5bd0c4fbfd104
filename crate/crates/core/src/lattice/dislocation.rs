use std::f64::consts::PI;
use std::sync::Arc;

use crate::configuration::Configuration;
use crate::geometry::{LinearMap, SimplicialBody, Vector};
use crate::{Error, Result};

/// Barycentric coordinates at or below this count as lying on a facet.
const FACET_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DislocationKind {
    /// Plane-strain Volterra edge dislocation.
    Edge,
    /// The 2D analogue of a screw dislocation: the displacement is `b θ / 2π`.
    ScrewAnalogue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DislocationSpec {
    pub origin: [f64; 2],
    pub extent: [f64; 2],
    /// Squares per side.
    pub resolution: [usize; 2],
    pub core: [f64; 2],
    pub burgers: [f64; 2],
    pub kind: DislocationKind,
    pub poisson: f64,
}

impl DislocationSpec {
    /// Edge dislocation on an `n x n` unit-spacing grid with the core at the centroid of
    /// the lower triangle of the central square.
    pub fn edge(n: usize, burgers: [f64; 2]) -> Self {
        let m = (n / 2) as f64;
        DislocationSpec {
            origin: [0.0, 0.0],
            extent: [n as f64, n as f64],
            resolution: [n, n],
            core: [m + 2.0 / 3.0, m + 1.0 / 3.0],
            burgers,
            kind: DislocationKind::Edge,
            poisson: 0.3,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidDislocation(msg.into()));
        if self.resolution.iter().any(|&r| r < 8) {
            return bad("resolution must be at least 8 per side");
        }
        if !self.extent.iter().all(|&e| e.is_finite() && e > 0.0) {
            return bad("extent must be positive");
        }
        let b = self.burgers;
        if !(b[0].is_finite() && b[1].is_finite()) || b[0].hypot(b[1]) == 0.0 {
            return bad("Burgers vector must be nonzero");
        }
        if !(self.poisson > -1.0 && self.poisson < 0.5) {
            return bad("Poisson ratio must lie in (-1, 1/2)");
        }
        if !(self.core.iter().all(|c| c.is_finite()) && self.origin.iter().all(|c| c.is_finite())) {
            return bad("core and origin must be finite");
        }
        Ok(())
    }
}

/// A dislocated configuration over the punctured grid.
#[derive(Clone, Debug)]
pub struct Dislocation {
    pub configuration: Configuration,
    /// Index of the removed core cell in the full grid.
    pub core_cell: usize,
    pub spec: DislocationSpec,
}

impl Dislocation {
    /// Vertex ring of the grid-aligned square with corners `lo` and `hi` (grid indices).
    pub fn ring(&self, lo: [usize; 2], hi: [usize; 2]) -> Vec<usize> {
        grid_ring(self.spec.resolution[0], lo, hi)
    }
}

/// Counter-clockwise closed vertex ring around a rectangle of a `grid_2d` vertex lattice
/// with `nx` squares per row.
pub fn grid_ring(nx: usize, lo: [usize; 2], hi: [usize; 2]) -> Vec<usize> {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut out = Vec::new();
    out.extend((lo[0]..hi[0]).map(|i| id(i, lo[1])));
    out.extend((lo[1]..hi[1]).map(|j| id(hi[0], j)));
    out.extend((lo[0] + 1..=hi[0]).rev().map(|i| id(i, hi[1])));
    out.extend((lo[1] + 1..=hi[1]).rev().map(|j| id(lo[0], j)));
    out.push(id(lo[0], lo[1]));
    out
}

/// Builds the Volterra dislocation: the core cell is removed and every other cell gets
/// `I + grad u`, where `u` is the linear interpolant of the analytic multivalued
/// displacement with the angle unwrapped inside each cell. The base map is the
/// reference placement.
pub fn make_dislocated(spec: &DislocationSpec) -> Result<Dislocation> {
    spec.validate()?;
    let grid = SimplicialBody::grid_2d(spec.resolution[0], spec.resolution[1], spec.origin, spec.extent)?;
    let core = Vector::from_slice(&spec.core);
    let hits = grid.locate(&core, FACET_TOLERANCE);
    let core_cell = match hits.as_slice() {
        [c] if grid.barycentric(*c, &core).iter().all(|&l| l > FACET_TOLERANCE) => *c,
        _ => return Err(Error::CoreOnFacet),
    };
    let body = Arc::new(grid.without_cells(&[core_cell])?);

    let b = Vector::from_slice(&spec.burgers);
    let bnorm = b.norm();
    // frame with the Burgers vector along the first axis
    let rot = LinearMap::from_columns(&[b.scale(1.0 / bnorm), Vector::from_slice(&[-b[1] / bnorm, b[0] / bnorm])]);
    let rot_t = rot.transpose();
    let refs = body.ref_coords();

    let field = (0..body.num_cells())
        .map(|c| {
            let cell = body.cell(c);
            let rel: Vec<Vector> = cell.iter().map(|&v| rot_t.apply(&(refs[v] - core))).collect();
            let theta0 = rel[0][1].atan2(rel[0][0]);
            let u: Vec<Vector> = rel
                .iter()
                .map(|p| {
                    let mut theta = p[1].atan2(p[0]);
                    while theta - theta0 > PI {
                        theta -= 2.0 * PI;
                    }
                    while theta - theta0 < -PI {
                        theta += 2.0 * PI;
                    }
                    rot.apply(&displacement(spec.kind, bnorm, spec.poisson, p, theta))
                })
                .collect();
            let du = LinearMap::from_columns(&[u[1] - u[0], u[2] - u[0]]);
            LinearMap::identity(2) + du * *body.ref_edge_matrix_inv(c)
        })
        .collect();
    let configuration = Configuration::new(body.clone(), refs.to_vec(), field)?;
    Ok(Dislocation {
        configuration,
        core_cell,
        spec: spec.clone(),
    })
}

/// Displacement in the frame where the Burgers vector is `(b, 0)`.
fn displacement(kind: DislocationKind, b: f64, nu: f64, p: &Vector, theta: f64) -> Vector {
    let (x, y) = (p[0], p[1]);
    let r2 = x * x + y * y;
    let k = b / (2.0 * PI);
    match kind {
        DislocationKind::ScrewAnalogue => Vector::from_slice(&[k * theta, 0.0]),
        DislocationKind::Edge => {
            let ux = k * (theta + x * y / (2.0 * (1.0 - nu) * r2));
            let uy = -k * ((1.0 - 2.0 * nu) / (4.0 * (1.0 - nu)) * r2.ln() + (x * x - y * y) / (4.0 * (1.0 - nu) * r2));
            Vector::from_slice(&[ux, uy])
        }
    }
}
