use std::collections::BTreeMap;

use super::linalg::{LinearMap, Vector};
use crate::{Error, Result};

/// Default relative threshold below which `|det|` of an edge matrix counts as degenerate.
pub const DEFAULT_DEGENERACY: f64 = 1e-14;

/// A facet of the mesh with its incident cells.
///
/// `left` is the first incident cell in cell order; `right` is `None` on the boundary.
/// Each incidence carries the local index of the cell vertex opposite the facet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub vertices: Vec<usize>,
    pub left: (usize, usize),
    pub right: Option<(usize, usize)>,
}

impl Facet {
    pub fn is_interior(&self) -> bool {
        self.right.is_some()
    }
}

/// The protobody: an oriented simplicial mesh carrying a single reference chart.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialBody {
    dim: usize,
    ref_coords: Vec<Vector>,
    cells: Vec<Vec<usize>>,
    facets: Vec<Facet>,
    cell_facets: Vec<Vec<usize>>,
    ref_edges: Vec<LinearMap>,
    ref_edges_inv: Vec<LinearMap>,
    degeneracy: f64,
}

impl SimplicialBody {
    pub fn new(dim: usize, ref_coords: Vec<Vector>, cells: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_degeneracy(dim, ref_coords, cells, DEFAULT_DEGENERACY)
    }

    pub fn with_degeneracy(
        dim: usize,
        ref_coords: Vec<Vector>,
        cells: Vec<Vec<usize>>,
        degeneracy: f64,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidBody(format!("dimension {dim} is not 2 or 3")));
        }
        if cells.is_empty() {
            return Err(Error::InvalidBody("no cells".into()));
        }
        for (i, p) in ref_coords.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::InvalidBody(format!(
                    "vertex {i} has {} coordinates, expected {dim}",
                    p.dim()
                )));
            }
            if p.as_slice().iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidBody(format!("vertex {i} is not finite")));
            }
        }
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != dim + 1 {
                return Err(Error::InvalidBody(format!(
                    "cell {c} has {} vertices, expected {}",
                    cell.len(),
                    dim + 1
                )));
            }
            for (k, &v) in cell.iter().enumerate() {
                if v >= ref_coords.len() {
                    return Err(Error::InvalidBody(format!(
                        "cell {c} vertex {k} index {v} out of range"
                    )));
                }
                if cell[..k].contains(&v) {
                    return Err(Error::InvalidBody(format!("cell {c} repeats vertex {v}")));
                }
            }
        }

        let mut ref_edges = Vec::with_capacity(cells.len());
        let mut ref_edges_inv = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let e = checked_edge_matrix(c, cell, &ref_coords, degeneracy)?;
            let inv = e.inverse().ok_or(Error::DegenerateCell {
                cell: c,
                det: e.determinant(),
            })?;
            ref_edges.push(e);
            ref_edges_inv.push(inv);
        }

        let (facets, cell_facets) = build_facets(dim, &cells)?;
        Ok(SimplicialBody {
            dim,
            ref_coords,
            cells,
            facets,
            cell_facets,
            ref_edges,
            ref_edges_inv,
            degeneracy,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.ref_coords.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn ref_coords(&self) -> &[Vector] {
        &self.ref_coords
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Facet ids of a cell, indexed by the local vertex opposite each facet.
    pub fn cell_facets(&self, c: usize) -> &[usize] {
        &self.cell_facets[c]
    }

    pub fn degeneracy(&self) -> f64 {
        self.degeneracy
    }

    /// Reference edge matrix of a cell (columns `X_i - X_0`).
    pub fn ref_edge_matrix(&self, c: usize) -> &LinearMap {
        &self.ref_edges[c]
    }

    pub fn ref_edge_matrix_inv(&self, c: usize) -> &LinearMap {
        &self.ref_edges_inv[c]
    }

    /// Edge matrix of `cell` under the vertex positions `coords`.
    pub fn edge_matrix(&self, cell: usize, coords: &[Vector]) -> Result<LinearMap> {
        if cell >= self.cells.len() {
            return Err(Error::InvalidBody(format!("cell index {cell} out of range")));
        }
        if coords.len() != self.ref_coords.len() {
            return Err(Error::Dimension(format!(
                "{} coordinates for {} vertices",
                coords.len(),
                self.ref_coords.len()
            )));
        }
        checked_edge_matrix_unsigned(cell, &self.cells[cell], coords, self.degeneracy)
    }

    pub fn barycenter(&self, cell: usize, coords: &[Vector]) -> Vector {
        let vs = &self.cells[cell];
        let mut acc = Vector::zeros(self.dim);
        for &v in vs {
            acc = acc + coords[v];
        }
        acc.scale(1.0 / vs.len() as f64)
    }

    /// Diameter of the axis-aligned bounding box of the reference chart.
    pub fn scale(&self) -> f64 {
        bounding_diameter(&self.ref_coords)
    }

    /// Barycentric coordinates of `p` in reference cell `c`.
    pub fn barycentric(&self, c: usize, p: &Vector) -> Vec<f64> {
        let x0 = self.ref_coords[self.cells[c][0]];
        let local = self.ref_edges_inv[c].apply(&(*p - x0));
        let mut out = Vec::with_capacity(self.dim + 1);
        out.push(1.0 - local.as_slice().iter().sum::<f64>());
        out.extend_from_slice(local.as_slice());
        out
    }

    /// Cells whose closure contains `p`, up to a relative tolerance on barycentric coordinates.
    pub fn locate(&self, p: &Vector, tol: f64) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&c| self.barycentric(c, p).iter().all(|&l| l >= -tol))
            .collect()
    }

    /// Connected components of the dual graph (cells joined through interior facets).
    pub fn dual_components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.cells.len()];
        let mut out = Vec::new();
        for start in 0..self.cells.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut i = 0;
            while i < members.len() {
                let c = members[i];
                i += 1;
                for &f in &self.cell_facets[c] {
                    if let Some(n) = self.neighbor(c, f) {
                        if comp[n] == usize::MAX {
                            comp[n] = id;
                            members.push(n);
                        }
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// The cell across facet `f` from `c`, if `f` is interior.
    pub fn neighbor(&self, c: usize, f: usize) -> Option<usize> {
        let facet = &self.facets[f];
        let (r, _) = facet.right?;
        if facet.left.0 == c {
            Some(r)
        } else if r == c {
            Some(facet.left.0)
        } else {
            None
        }
    }

    /// A new body with the listed cells removed; vertices are kept.
    pub fn without_cells(&self, removed: &[usize]) -> Result<SimplicialBody> {
        let cells = self
            .cells
            .iter()
            .enumerate()
            .filter(|(c, _)| !removed.contains(c))
            .map(|(_, cell)| cell.clone())
            .collect();
        Self::with_degeneracy(self.dim, self.ref_coords.clone(), cells, self.degeneracy)
    }

    /// Uniform triangulated rectangle with `nx * ny` squares, each split along its
    /// rising diagonal into two counter-clockwise triangles.
    pub fn grid_2d(nx: usize, ny: usize, origin: [f64; 2], size: [f64; 2]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidBody("grid resolution must be positive".into()));
        }
        let (hx, hy) = (size[0] / nx as f64, size[1] / ny as f64);
        let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                coords.push(Vector::from_slice(&[
                    origin[0] + i as f64 * hx,
                    origin[1] + j as f64 * hy,
                ]));
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut cells = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self::new(2, coords, cells)
    }

    /// Uniform box split into `6 * nx * ny * nz` tetrahedra (Kuhn subdivision).
    pub fn grid_3d(n: [usize; 3], origin: [f64; 3], size: [f64; 3]) -> Result<Self> {
        let [nx, ny, nz] = n;
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidBody("grid resolution must be positive".into()));
        }
        let h = [size[0] / nx as f64, size[1] / ny as f64, size[2] / nz as f64];
        let mut coords = Vec::new();
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    coords.push(Vector::from_slice(&[
                        origin[0] + i as f64 * h[0],
                        origin[1] + j as f64 * h[1],
                        origin[2] + k as f64 * h[2],
                    ]));
                }
            }
        }
        let id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut cells = Vec::new();
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    for p in &perms {
                        let mut corner = [i, j, k];
                        let mut tet = vec![id(i, j, k)];
                        for &axis in p {
                            corner[axis] += 1;
                            tet.push(id(corner[0], corner[1], corner[2]));
                        }
                        let e = raw_edge_matrix(&tet, &coords);
                        if e.determinant() < 0.0 {
                            tet.swap(1, 2);
                        }
                        cells.push(tet);
                    }
                }
            }
        }
        Self::new(3, coords, cells)
    }
}

pub(crate) fn bounding_diameter(points: &[Vector]) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    let dim = first.dim();
    let mut lo = *first;
    let mut hi = *first;
    for p in points {
        for i in 0..dim {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (hi - lo).norm()
}

fn raw_edge_matrix(cell: &[usize], coords: &[Vector]) -> LinearMap {
    let x0 = coords[cell[0]];
    let cols: Vec<Vector> = cell[1..].iter().map(|&v| coords[v] - x0).collect();
    LinearMap::from_columns(&cols)
}

fn degeneracy_floor(e: &LinearMap, tol: f64) -> f64 {
    let longest = (0..e.dim()).map(|j| e.column(j).norm()).fold(0.0, f64::max);
    tol * longest.powi(e.dim() as i32)
}

fn checked_edge_matrix_unsigned(c: usize, cell: &[usize], coords: &[Vector], tol: f64) -> Result<LinearMap> {
    let e = raw_edge_matrix(cell, coords);
    let det = e.determinant();
    if !det.is_finite() || det.abs() <= degeneracy_floor(&e, tol) {
        return Err(Error::DegenerateCell { cell: c, det });
    }
    Ok(e)
}

fn checked_edge_matrix(c: usize, cell: &[usize], coords: &[Vector], tol: f64) -> Result<LinearMap> {
    let e = checked_edge_matrix_unsigned(c, cell, coords, tol)?;
    let det = e.determinant();
    if det <= 0.0 {
        return Err(Error::OrientationViolation { cell: c, det });
    }
    Ok(e)
}

type FacetTable = (Vec<Facet>, Vec<Vec<usize>>);

fn build_facets(dim: usize, cells: &[Vec<usize>]) -> Result<FacetTable> {
    let mut by_key: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
    for (c, cell) in cells.iter().enumerate() {
        for skip in 0..=dim {
            let mut key: Vec<usize> = cell
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != skip)
                .map(|(_, &v)| v)
                .collect();
            key.sort_unstable();
            by_key.entry(key).or_default().push((c, skip));
        }
    }
    let mut facets = Vec::with_capacity(by_key.len());
    let mut cell_facets = vec![vec![usize::MAX; dim + 1]; cells.len()];
    for (key, incid) in by_key {
        let right = match incid.len() {
            1 => None,
            2 => Some(incid[1]),
            n => return Err(Error::InvalidBody(format!("facet {key:?} is shared by {n} cells"))),
        };
        let id = facets.len();
        for &(c, local) in &incid {
            cell_facets[c][local] = id;
        }
        facets.push(Facet {
            vertices: key,
            left: incid[0],
            right,
        });
    }
    Ok((facets, cell_facets))
}
