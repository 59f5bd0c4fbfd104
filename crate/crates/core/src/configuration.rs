//! Configurations as discrete vector-bundle morphisms.
//!
//! A [`Configuration`] places the vertices of a [`SimplicialBody`] in space (the base map)
//! and attaches to every cell a linear map acting on reference vectors (the fiber map).
//! The base map is piecewise affine, so its tangent map is one matrix per cell. The
//! configuration is holonomic when the fiber field coincides with that tangent map.
//!
//! [`StandaloneField`] is a per-cell field without a base map; [`StandaloneField::is_gradient`]
//! decides whether some continuous piecewise-affine base map has it as tangent map.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::geometry::{bounding_diameter, LinearMap, SimplicialBody, Vector};
use crate::{Error, Result};

/// Default relative tolerance for holonomy and gradient checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Configuration {
    body: Arc<SimplicialBody>,
    base: Vec<Vector>,
    field: Vec<LinearMap>,
    injective: Option<bool>,
}

impl Configuration {
    /// Validates the base map as a local oriented embedding and every fiber map as an
    /// orientation-preserving isomorphism.
    pub fn new(body: Arc<SimplicialBody>, base: Vec<Vector>, field: Vec<LinearMap>) -> Result<Self> {
        if base.len() != body.num_vertices() {
            return Err(Error::Dimension(format!(
                "{} placed points for {} vertices",
                base.len(),
                body.num_vertices()
            )));
        }
        if let Some(p) = base.iter().find(|p| p.dim() != body.dim()) {
            return Err(Error::Dimension(format!(
                "placed point of dimension {} in a {}-d body",
                p.dim(),
                body.dim()
            )));
        }
        check_field(&body, &field)?;
        for c in 0..body.num_cells() {
            let e = body.edge_matrix(c, &base)?;
            let det = e.determinant();
            if det <= 0.0 {
                return Err(Error::OrientationViolation { cell: c, det });
            }
        }
        Ok(Configuration {
            body,
            base,
            field,
            injective: None,
        })
    }

    /// The holonomic configuration over `base`: fiber field equal to the tangent map.
    pub fn holonomic(body: Arc<SimplicialBody>, base: Vec<Vector>) -> Result<Self> {
        let n = body.num_cells();
        let provisional = vec![LinearMap::identity(body.dim()); n];
        let mut c = Configuration::new(body, base, provisional)?;
        c.field = c.tangent_map().field;
        check_field(&c.body, &c.field)?;
        Ok(c)
    }

    /// Identity base map with the given field, i.e. the field seen over the reference chart.
    pub fn over_reference(body: Arc<SimplicialBody>, field: Vec<LinearMap>) -> Result<Self> {
        let base = body.ref_coords().to_vec();
        Configuration::new(body, base, field)
    }

    pub fn body(&self) -> &Arc<SimplicialBody> {
        &self.body
    }

    pub fn base(&self) -> &[Vector] {
        &self.base
    }

    pub fn field(&self) -> &[LinearMap] {
        &self.field
    }

    /// Result of the last [`Configuration::check_injectivity`] call, if any.
    pub fn is_injective(&self) -> Option<bool> {
        self.injective
    }

    pub fn same_body(&self, other: &Configuration) -> bool {
        Arc::ptr_eq(&self.body, &other.body) || *self.body == *other.body
    }

    /// Tangent map of the base: `placed_edges * reference_edges^-1` per cell.
    pub fn tangent_map(&self) -> StandaloneField {
        let field = (0..self.body.num_cells()).map(|c| self.cell_tangent(c)).collect();
        StandaloneField {
            body: self.body.clone(),
            field,
        }
    }

    pub(crate) fn cell_tangent(&self, c: usize) -> LinearMap {
        let e = self.body.edge_matrix(c, &self.base).expect("validated at construction");
        e * *self.body.ref_edge_matrix_inv(c)
    }

    /// Per-cell residual `|field - T base|_F / max(1, |T base|_F)`.
    pub fn is_holonomic(&self, tol: f64) -> HolonomyReport {
        let residuals: Vec<f64> = (0..self.body.num_cells())
            .map(|c| {
                let t = self.cell_tangent(c);
                (self.field[c] - t).frobenius_norm() / t.frobenius_norm().max(1.0)
            })
            .collect();
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        HolonomyReport {
            holonomic: max_residual <= tol,
            max_residual,
            residuals,
        }
    }

    /// Pairwise simplex intersection test over all cells; records and returns the verdict.
    pub fn check_injectivity(&mut self) -> bool {
        let ok = !placement_self_overlaps(&self.body, &self.base);
        self.injective = Some(ok);
        ok
    }

    pub fn as_standalone(&self) -> StandaloneField {
        StandaloneField {
            body: self.body.clone(),
            field: self.field.clone(),
        }
    }

    pub(crate) fn from_parts_unchecked(body: Arc<SimplicialBody>, base: Vec<Vector>, field: Vec<LinearMap>) -> Self {
        Configuration {
            body,
            base,
            field,
            injective: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyReport {
    pub holonomic: bool,
    pub max_residual: f64,
    pub residuals: Vec<f64>,
}

/// A per-cell field of linear maps with no base map.
#[derive(Clone, Debug)]
pub struct StandaloneField {
    body: Arc<SimplicialBody>,
    field: Vec<LinearMap>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GradientVerdict {
    /// The field is the tangent map of `base`, anchored with the first used vertex at the
    /// origin.
    Gradient { base: Vec<Vector> },
    /// Interior facets across which the field cannot be integrated, sorted by index.
    /// `inconsistent_vertices` lists vertices whose placements disagree even though every
    /// facet passed (only possible at non-manifold vertices).
    NotGradient {
        violating_facets: Vec<usize>,
        inconsistent_vertices: Vec<usize>,
    },
}

impl GradientVerdict {
    pub fn is_gradient(&self) -> bool {
        matches!(self, GradientVerdict::Gradient { .. })
    }
}

impl StandaloneField {
    pub fn new(body: Arc<SimplicialBody>, field: Vec<LinearMap>) -> Result<Self> {
        check_field(&body, &field)?;
        Ok(StandaloneField { body, field })
    }

    pub fn body(&self) -> &Arc<SimplicialBody> {
        &self.body
    }

    pub fn field(&self) -> &[LinearMap] {
        &self.field
    }

    pub fn into_field(self) -> Vec<LinearMap> {
        self.field
    }

    /// Decides integrability by spanning-tree integration over the dual graph.
    ///
    /// Cells are visited breadth-first from cell 0. Each cell receives its own copy of
    /// its vertex positions: shared facet vertices are inherited from the parent and the
    /// opposite vertex is placed with the cell's own field. A facet then violates the
    /// gradient condition if the two fields disagree on a facet-tangent vector, or, for
    /// facets outside the tree, if the two copies of the facet vertices do not coincide
    /// (a closure defect such as a Burgers vector around a hole).
    pub fn is_gradient(&self, tol: f64) -> Result<GradientVerdict> {
        let integ = Integration::run(&self.body, &self.field)?;
        let scale = integ.scale();
        let mut violating = Vec::new();
        for (f, jump) in integ.jumps.iter().enumerate() {
            let Some(jump) = jump else { continue };
            let tangential_ok = jump
                .tangential
                .iter()
                .all(|(d, reference)| d.norm() <= tol * reference.max(f64::MIN_POSITIVE));
            let closure_ok = jump.closure.iter().all(|d| d.norm() <= tol * scale);
            if !(tangential_ok && closure_ok) {
                violating.push(f);
            }
        }
        if !violating.is_empty() {
            return Ok(GradientVerdict::NotGradient {
                violating_facets: violating,
                inconsistent_vertices: Vec::new(),
            });
        }
        let (base, inconsistent) = integ.assemble(tol * scale);
        if !inconsistent.is_empty() {
            return Ok(GradientVerdict::NotGradient {
                violating_facets: Vec::new(),
                inconsistent_vertices: inconsistent,
            });
        }
        Ok(GradientVerdict::Gradient { base })
    }

    /// Sum of squared tangential facet jumps plus squared closure defects on the
    /// non-tree facets of the integration tree. Zero exactly when the field integrates.
    pub fn incompatibility_norm(&self) -> Result<f64> {
        let integ = Integration::run(&self.body, &self.field)?;
        Ok(integ.jumps.iter().flatten().map(FacetJump::squared).sum())
    }

    /// Per-cell share of [`StandaloneField::incompatibility_norm`]: each facet contributes
    /// half its squared jump to each adjacent cell.
    pub fn cell_incompatibility(&self) -> Result<Vec<f64>> {
        let integ = Integration::run(&self.body, &self.field)?;
        let mut out = vec![0.0; self.body.num_cells()];
        for (f, jump) in integ.jumps.iter().enumerate() {
            if let Some(jump) = jump {
                let facet = &self.body.facets()[f];
                let half = 0.5 * jump.squared();
                out[facet.left.0] += half;
                if let Some((r, _)) = facet.right {
                    out[r] += half;
                }
            }
        }
        Ok(out)
    }
}

fn check_field(body: &SimplicialBody, field: &[LinearMap]) -> Result<()> {
    if field.len() != body.num_cells() {
        return Err(Error::Dimension(format!(
            "{} field matrices for {} cells",
            field.len(),
            body.num_cells()
        )));
    }
    for (c, f) in field.iter().enumerate() {
        if f.dim() != body.dim() {
            return Err(Error::Dimension(format!(
                "cell {c}: {}x{} field matrix in a {}-d body",
                f.dim(),
                f.dim(),
                body.dim()
            )));
        }
        let det = f.determinant();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::OrientationViolation { cell: c, det });
        }
    }
    Ok(())
}

struct FacetJump {
    /// `(F_left - F_right) t` for each facet tangent `t`, with a reference magnitude.
    tangential: Vec<(Vector, f64)>,
    /// Disagreement of the two cell-local copies of each facet vertex (non-tree facets).
    closure: Vec<Vector>,
}

impl FacetJump {
    fn squared(&self) -> f64 {
        self.tangential
            .iter()
            .map(|(d, _)| d.dot(d))
            .chain(self.closure.iter().map(|d| d.dot(d)))
            .sum()
    }
}

struct Integration<'a> {
    body: &'a SimplicialBody,
    order: Vec<usize>,
    local: Vec<Vec<Vector>>,
    jumps: Vec<Option<FacetJump>>,
}

impl<'a> Integration<'a> {
    fn run(body: &'a SimplicialBody, field: &[LinearMap]) -> Result<Self> {
        let n = body.num_cells();
        let dim = body.dim();
        let refs = body.ref_coords();
        let mut local: Vec<Vec<Vector>> = vec![Vec::new(); n];
        let mut tree_facet = vec![false; body.facets().len()];
        let mut order = Vec::with_capacity(n);

        let root = 0;
        let cell = body.cell(root);
        let x0 = refs[cell[0]];
        local[root] = cell.iter().map(|&v| field[root].apply(&(refs[v] - x0))).collect();
        let mut queue = VecDeque::from([root]);
        let mut seen = vec![false; n];
        seen[root] = true;
        while let Some(a) = queue.pop_front() {
            order.push(a);
            for &f in body.cell_facets(a) {
                let Some(b) = body.neighbor(a, f) else { continue };
                if seen[b] {
                    continue;
                }
                seen[b] = true;
                tree_facet[f] = true;
                let a_cell = body.cell(a);
                let b_cell = body.cell(b);
                let inherited =
                    |v: usize| -> Option<Vector> { a_cell.iter().position(|&w| w == v).map(|k| local[a][k]) };
                let (s_vertex, s_pos) = b_cell
                    .iter()
                    .find_map(|&v| inherited(v).map(|p| (v, p)))
                    .expect("neighbors share a facet");
                let placed: Vec<Vector> = b_cell
                    .iter()
                    .map(|&v| inherited(v).unwrap_or_else(|| s_pos + field[b].apply(&(refs[v] - refs[s_vertex]))))
                    .collect();
                local[b] = placed;
                queue.push_back(b);
            }
        }
        if order.len() != n {
            return Err(Error::DisconnectedBody);
        }

        let mut jumps: Vec<Option<FacetJump>> = Vec::with_capacity(body.facets().len());
        for (f, facet) in body.facets().iter().enumerate() {
            let Some((r, _)) = facet.right else {
                jumps.push(None);
                continue;
            };
            let l = facet.left.0;
            let v0 = facet.vertices[0];
            let tangential = facet.vertices[1..dim]
                .iter()
                .map(|&v| {
                    let t = refs[v] - refs[v0];
                    let (fl, fr) = (field[l].apply(&t), field[r].apply(&t));
                    (fl - fr, fl.norm().max(fr.norm()).max(t.norm()))
                })
                .collect();
            let closure = if tree_facet[f] {
                Vec::new()
            } else {
                facet
                    .vertices
                    .iter()
                    .map(|&v| local_position(body, &local, l, v) - local_position(body, &local, r, v))
                    .collect()
            };
            jumps.push(Some(FacetJump { tangential, closure }));
        }
        Ok(Integration {
            body,
            order,
            local,
            jumps,
        })
    }

    /// Length scale for closure defects: the larger of the reference and integrated extents.
    fn scale(&self) -> f64 {
        let placed: Vec<Vector> = self.local.iter().flatten().copied().collect();
        bounding_diameter(&placed).max(self.body.scale()).max(f64::MIN_POSITIVE)
    }

    /// Global vertex positions (first visit wins), shifted so the first used vertex sits
    /// at the origin, together with vertices whose cell-local copies disagree.
    fn assemble(&self, tol: f64) -> (Vec<Vector>, Vec<usize>) {
        let dim = self.body.dim();
        let nv = self.body.num_vertices();
        let mut pos: Vec<Option<Vector>> = vec![None; nv];
        let mut inconsistent = Vec::new();
        for &c in &self.order {
            for (k, &v) in self.body.cell(c).iter().enumerate() {
                let p = self.local[c][k];
                match pos[v] {
                    None => pos[v] = Some(p),
                    Some(q) => {
                        if (p - q).norm() > tol && !inconsistent.contains(&v) {
                            inconsistent.push(v);
                        }
                    }
                }
            }
        }
        inconsistent.sort_unstable();
        let anchor = pos.iter().flatten().next().copied().unwrap_or(Vector::zeros(dim));
        let base = pos
            .into_iter()
            .enumerate()
            .map(|(v, p)| match p {
                Some(p) => p - anchor,
                // vertices outside every cell follow the reference chart
                None => self.body.ref_coords()[v] - self.body.ref_coords()[0],
            })
            .collect();
        (base, inconsistent)
    }
}

fn local_position(body: &SimplicialBody, local: &[Vec<Vector>], cell: usize, v: usize) -> Vector {
    let k = body
        .cell(cell)
        .iter()
        .position(|&w| w == v)
        .expect("facet vertex belongs to incident cell");
    local[cell][k]
}

fn placement_self_overlaps(body: &SimplicialBody, base: &[Vector]) -> bool {
    let simplices: Vec<Vec<Vector>> = body
        .cells()
        .iter()
        .map(|cell| cell.iter().map(|&v| base[v]).collect())
        .collect();
    let eps = 1e-12 * bounding_diameter(base).max(f64::MIN_POSITIVE);
    let boxes: Vec<(Vector, Vector)> = simplices.iter().map(|s| aabb(s)).collect();
    for i in 0..simplices.len() {
        for j in i + 1..simplices.len() {
            let (lo_i, hi_i) = &boxes[i];
            let (lo_j, hi_j) = &boxes[j];
            let disjoint_boxes = (0..body.dim()).any(|k| hi_i[k] <= lo_j[k] + eps || hi_j[k] <= lo_i[k] + eps);
            if !disjoint_boxes && simplices_overlap(&simplices[i], &simplices[j], eps) {
                return true;
            }
        }
    }
    false
}

fn aabb(points: &[Vector]) -> (Vector, Vector) {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        for k in 0..p.dim() {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Separating-axis test for interior overlap of two simplices; touching counts as disjoint.
fn simplices_overlap(a: &[Vector], b: &[Vector], eps: f64) -> bool {
    let dim = a[0].dim();
    let mut axes: Vec<Vector> = Vec::new();
    match dim {
        2 => {
            for s in [a, b] {
                for i in 0..3 {
                    let e = s[(i + 1) % 3] - s[i];
                    axes.push(Vector::from_slice(&[-e[1], e[0]]));
                }
            }
        }
        3 => {
            let edges = |s: &[Vector]| -> Vec<Vector> {
                let mut out = Vec::new();
                for i in 0..4 {
                    for j in i + 1..4 {
                        out.push(s[j] - s[i]);
                    }
                }
                out
            };
            let (ea, eb) = (edges(a), edges(b));
            for s in [a, b] {
                for skip in 0..4 {
                    let f: Vec<Vector> = (0..4).filter(|&k| k != skip).map(|k| s[k]).collect();
                    axes.push(cross(&(f[1] - f[0]), &(f[2] - f[0])));
                }
            }
            for u in &ea {
                for w in &eb {
                    axes.push(cross(u, w));
                }
            }
        }
        _ => unreachable!("bodies are 2- or 3-dimensional"),
    }
    for axis in axes {
        let len = axis.norm();
        if len == 0.0 {
            continue;
        }
        let project = |s: &[Vector]| {
            s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let d = p.dot(&axis) / len;
                (lo.min(d), hi.max(d))
            })
        };
        let (alo, ahi) = project(a);
        let (blo, bhi) = project(b);
        if ahi <= blo + eps || bhi <= alo + eps {
            return false;
        }
    }
    true
}

fn cross(u: &Vector, w: &Vector) -> Vector {
    Vector::from_slice(&[
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_slice(xs)
    }

    fn grid(n: usize) -> Arc<SimplicialBody> {
        Arc::new(SimplicialBody::grid_2d(n, n, [0.0, 0.0], [1.0, 1.0]).unwrap())
    }

    fn affine_base(body: &SimplicialBody, a: &LinearMap, c: &Vector) -> Vec<Vector> {
        body.ref_coords().iter().map(|x| a.apply(x) + *c).collect()
    }

    #[test]
    fn identity_placement_has_identity_tangent() {
        let body = grid(3);
        let c = Configuration::over_reference(body.clone(), vec![LinearMap::identity(2); body.num_cells()]).unwrap();
        for t in c.tangent_map().field() {
            assert!(t.relative_deviation(&LinearMap::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn affine_placement_has_constant_tangent() {
        let body = grid(4);
        let a = LinearMap::from_rows(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let base = affine_base(&body, &a, &v(&[1.0, -1.0]));
        let c = Configuration::holonomic(body, base).unwrap();
        for t in c.tangent_map().field() {
            assert!(t.relative_deviation(&a) < 1e-14);
        }
    }

    #[test]
    fn sheared_single_triangle_tangent() {
        let body = Arc::new(
            SimplicialBody::new(
                2,
                vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])],
                vec![vec![0, 1, 2]],
            )
            .unwrap(),
        );
        let base = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0])];
        let c = Configuration::holonomic(body, base).unwrap();
        assert_eq!(
            c.tangent_map().field()[0],
            LinearMap::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]])
        );
    }

    #[test]
    fn holonomy_detects_single_doubled_cell() {
        let body = grid(3);
        let mut field = vec![LinearMap::identity(2); body.num_cells()];
        field[4] = LinearMap::scaled_identity(2, 2.0);
        let c = Configuration::over_reference(body, field).unwrap();
        let report = c.is_holonomic(1e-9);
        assert!(!report.holonomic);
        assert!((report.residuals[4] - 1.0).abs() < 1e-15);
        assert!(report.residuals.iter().enumerate().all(|(k, r)| k == 4 || *r == 0.0));
    }

    #[test]
    fn holonomic_constructor_is_holonomic() {
        let body = grid(3);
        let a = LinearMap::from_rows(&[&[1.0, 0.4], &[-0.2, 1.3]]);
        let c = Configuration::holonomic(body.clone(), affine_base(&body, &a, &v(&[0.0, 2.0]))).unwrap();
        let r = c.is_holonomic(1e-12);
        assert!(r.holonomic, "{}", r.max_residual);
    }

    #[test]
    fn inverted_placement_is_rejected() {
        let body = grid(2);
        let base = body.ref_coords().iter().map(|x| v(&[x[0], -x[1]])).collect();
        let r = Configuration::new(body.clone(), base, vec![LinearMap::identity(2); body.num_cells()]);
        assert!(matches!(r, Err(Error::OrientationViolation { .. })));
    }

    #[test]
    fn constant_field_integrates_to_affine_map() {
        let body = grid(4);
        let a = LinearMap::from_rows(&[&[1.2, 0.3], &[-0.1, 0.8]]);
        let f = StandaloneField::new(body.clone(), vec![a; body.num_cells()]).unwrap();
        let GradientVerdict::Gradient { base } = f.is_gradient(1e-9).unwrap() else {
            panic!("constant field must integrate");
        };
        let x0 = body.ref_coords()[0];
        for (p, x) in base.iter().zip(body.ref_coords()) {
            assert!((*p - a.apply(&(*x - x0))).norm() < 1e-14);
        }
        assert!(f.incompatibility_norm().unwrap() < 1e-28);
    }

    #[test]
    fn perturbed_cell_breaks_integrability() {
        let body = grid(4);
        let mut field = vec![LinearMap::identity(2); body.num_cells()];
        field[7] = LinearMap::from_rows(&[&[1.001, 0.0], &[0.0, 1.0]]);
        let f = StandaloneField::new(body.clone(), field).unwrap();
        match f.is_gradient(1e-9).unwrap() {
            GradientVerdict::NotGradient { violating_facets, .. } => {
                assert!(!violating_facets.is_empty());
                for facet in violating_facets {
                    let fc = &body.facets()[facet];
                    assert!(fc.left.0 == 7 || fc.right.map(|r| r.0) == Some(7));
                }
            }
            other => panic!("expected violation, got {other:?}"),
        }
        assert!(f.incompatibility_norm().unwrap() > 0.0);
    }

    #[test]
    fn disconnected_body_is_reported() {
        let pts = vec![
            v(&[0.0, 0.0]),
            v(&[1.0, 0.0]),
            v(&[0.0, 1.0]),
            v(&[5.0, 0.0]),
            v(&[6.0, 0.0]),
            v(&[5.0, 1.0]),
        ];
        let body = Arc::new(SimplicialBody::new(2, pts, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap());
        let f = StandaloneField::new(body, vec![LinearMap::identity(2); 2]).unwrap();
        assert!(matches!(f.is_gradient(1e-9), Err(Error::DisconnectedBody)));
    }

    #[test]
    fn injectivity_of_folded_placement() {
        let body = grid(2);
        let mut c =
            Configuration::over_reference(body.clone(), vec![LinearMap::identity(2); body.num_cells()]).unwrap();
        assert!(c.check_injectivity());
        assert_eq!(c.is_injective(), Some(true));

        // Wrap a strip around so its two ends overlap while every cell stays positive.
        let strip = Arc::new(SimplicialBody::grid_2d(12, 1, [0.0, 0.0], [12.0, 1.0]).unwrap());
        let base: Vec<Vector> = strip
            .ref_coords()
            .iter()
            .map(|x| {
                let theta = x[0] / 12.0 * 2.4 * std::f64::consts::PI;
                let r = 3.0 - x[1];
                v(&[r * theta.cos(), r * theta.sin()])
            })
            .collect();
        let n = strip.num_cells();
        let mut wrapped = Configuration::new(strip, base, vec![LinearMap::identity(2); n]).unwrap();
        assert!(!wrapped.check_injectivity());
    }

    #[test]
    fn tetrahedra_overlap() {
        let t = |o: f64| {
            vec![
                v(&[o, 0.0, 0.0]),
                v(&[o + 1.0, 0.0, 0.0]),
                v(&[o, 1.0, 0.0]),
                v(&[o, 0.0, 1.0]),
            ]
        };
        assert!(simplices_overlap(&t(0.0), &t(0.2), 1e-12));
        assert!(!simplices_overlap(&t(0.0), &t(1.0), 1e-12));
        assert!(!simplices_overlap(&t(0.0), &t(3.0), 1e-12));
    }
}
