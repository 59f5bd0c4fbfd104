//! The incompatible-compatible factorization `field = T(base) * F_ae`.
//!
//! `F_ae = T(base)^-1 * field` is a field of orientation-preserving isomorphisms of the
//! reference fibers over the identity of the body. It is unchanged when the configuration
//! is pushed forward by a displacement of space, so it labels the embodiment (compatibility
//! class) of the configuration and plays the role of the plastic factor `F^p`, while the
//! tangent map of the base is the compatible factor `F^e`.

use std::sync::Arc;

use crate::configuration::Configuration;
use crate::geometry::{LinearMap, SimplicialBody, SpaceDiffeo, Vector};
use crate::{Error, Result};

/// Tangent maps with a larger 1-norm condition number are rejected as near-degenerate.
pub const MAX_CONDITION: f64 = 1e12;

/// The canonical representative of an embodiment: a per-cell field over the identity base.
#[derive(Clone, Debug)]
pub struct Embodiment {
    body: Arc<SimplicialBody>,
    f_ae: Vec<LinearMap>,
}

impl Embodiment {
    pub fn body(&self) -> &Arc<SimplicialBody> {
        &self.body
    }

    pub fn field(&self) -> &[LinearMap] {
        &self.f_ae
    }

    /// Largest cellwise relative deviation from another embodiment on the same body.
    pub fn max_deviation(&self, other: &Embodiment) -> Result<f64> {
        if !(Arc::ptr_eq(&self.body, &other.body) || *self.body == *other.body) {
            return Err(Error::BodyMismatch);
        }
        Ok(self
            .f_ae
            .iter()
            .zip(&other.f_ae)
            .map(|(a, b)| a.relative_deviation(b))
            .fold(0.0, f64::max))
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let id = LinearMap::identity(self.body.dim());
        self.f_ae.iter().all(|f| f.relative_deviation(&id) <= tol)
    }

    /// The embodiment seen as a configuration over the identity base map.
    pub fn to_configuration(&self) -> Result<Configuration> {
        Configuration::over_reference(self.body.clone(), self.f_ae.clone())
    }
}

#[derive(Clone, Debug)]
pub struct DecompositionResult {
    /// Base map with its own tangent map as field (the factor `F^e`).
    pub compatible: Configuration,
    /// The factor `F^p = F_ae`.
    pub anelastic: Embodiment,
}

impl DecompositionResult {
    /// Max over cells of `|F^e F^p - field| / max(1, |field|)` (entrywise max norm).
    pub fn reconstruction_residual(&self, original: &Configuration) -> f64 {
        self.compatible
            .field()
            .iter()
            .zip(self.anelastic.field())
            .zip(original.field())
            .map(|((fe, fp), f)| (*fe * *fp).relative_deviation(f))
            .fold(0.0, f64::max)
    }
}

pub fn decompose(c: &Configuration) -> Result<DecompositionResult> {
    let body = c.body().clone();
    let mut tangents = Vec::with_capacity(body.num_cells());
    let mut f_ae = Vec::with_capacity(body.num_cells());
    for (cell, field) in c.field().iter().enumerate() {
        let t = c.cell_tangent(cell);
        let cond = t.condition_number();
        if !(cond <= MAX_CONDITION) {
            return Err(Error::IllConditioned { cell, cond });
        }
        let inv = t.inverse().ok_or(Error::DegenerateCell {
            cell,
            det: t.determinant(),
        })?;
        let fp = inv * *field;
        let det = fp.determinant();
        if !(det > 0.0) {
            return Err(Error::OrientationViolation { cell, det });
        }
        tangents.push(t);
        f_ae.push(fp);
    }
    let compatible = Configuration::from_parts_unchecked(body.clone(), c.base().to_vec(), tangents);
    Ok(DecompositionResult {
        compatible,
        anelastic: Embodiment { body, f_ae },
    })
}

pub fn embodiment_of(c: &Configuration) -> Result<Embodiment> {
    decompose(c).map(|d| d.anelastic)
}

/// Where the tangent of a non-affine displacement is sampled when pushing a cell forward.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TangentRule {
    /// `Tg` at the placed cell barycenter: first-order agreement with the pushed base.
    Barycenter,
    /// `Tg` at the midpoint of each placed edge `x_i - x_0`, assembled into one linear map
    /// that sends each edge `e_i` to `Tg(m_i) e_i`. Agrees with the tangent of the pushed
    /// base to second order in the mesh size.
    #[default]
    EdgeMidpoints,
}

/// `Tg ∘ c`: moves the base by `g` and the fibers by its tangent map.
pub fn push_forward(c: &Configuration, g: &SpaceDiffeo) -> Result<Configuration> {
    push_forward_with(c, g, TangentRule::default())
}

pub fn push_forward_with(c: &Configuration, g: &SpaceDiffeo, rule: TangentRule) -> Result<Configuration> {
    let body = c.body();
    if g.dim() != body.dim() {
        return Err(Error::Dimension(format!(
            "{}-d displacement applied to a {}-d body",
            g.dim(),
            body.dim()
        )));
    }
    let base: Vec<Vector> = c.base().iter().map(|y| g.apply(y)).collect();
    let field: Vec<LinearMap> = match g.as_affine() {
        Some(a) => c.field().iter().map(|f| *a.linear() * *f).collect(),
        None => (0..body.num_cells())
            .map(|cell| cell_tangent_of(g, body, cell, c.base(), rule) * c.field()[cell])
            .collect(),
    };
    Configuration::new(body.clone(), base, field)
}

fn cell_tangent_of(
    g: &SpaceDiffeo,
    body: &SimplicialBody,
    cell: usize,
    base: &[Vector],
    rule: TangentRule,
) -> LinearMap {
    match rule {
        TangentRule::Barycenter => g.tangent_at(&body.barycenter(cell, base)),
        TangentRule::EdgeMidpoints => {
            let vs = body.cell(cell);
            let x0 = base[vs[0]];
            let edges: Vec<Vector> = vs[1..].iter().map(|&v| base[v] - x0).collect();
            let images: Vec<Vector> = vs[1..]
                .iter()
                .zip(&edges)
                .map(|(&v, e)| g.apply_tangent(&(x0 + base[v]).scale(0.5), e))
                .collect();
            let e = LinearMap::from_columns(&edges);
            match e.inverse() {
                Some(inv) => LinearMap::from_columns(&images) * inv,
                None => g.tangent_at(&body.barycenter(cell, base)),
            }
        }
    }
}

/// The two factors of the dissect-and-pack viewpoint.
#[derive(Clone, Debug)]
pub struct ViewIFactors {
    /// `F_ae^-1` per cell: releases the body into the stress-free, incompatible pieces.
    pub release: Vec<LinearMap>,
    /// The original configuration, read as the map packing those pieces into space.
    pub pack: Configuration,
}

impl ViewIFactors {
    /// `pack.field * release` per cell, the compatible total of this viewpoint.
    pub fn composite(&self) -> Vec<LinearMap> {
        self.pack
            .field()
            .iter()
            .zip(&self.release)
            .map(|(f, r)| *f * *r)
            .collect()
    }
}

pub fn view_i_factors(c: &Configuration) -> Result<ViewIFactors> {
    let emb = embodiment_of(c)?;
    let release = emb
        .field()
        .iter()
        .enumerate()
        .map(|(cell, f)| {
            f.inverse().ok_or(Error::DegenerateCell {
                cell,
                det: f.determinant(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ViewIFactors {
        release,
        pack: c.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AffineMap;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_slice(xs)
    }

    fn body() -> Arc<SimplicialBody> {
        Arc::new(SimplicialBody::grid_2d(3, 3, [0.0, 0.0], [3.0, 3.0]).unwrap())
    }

    fn bent(body: &SimplicialBody) -> Vec<Vector> {
        body.ref_coords()
            .iter()
            .map(|x| v(&[x[0] + 0.05 * x[1] * x[1], x[1] + 0.1 * x[0]]))
            .collect()
    }

    fn shear(k: f64) -> LinearMap {
        LinearMap::from_rows(&[&[1.0, k], &[0.0, 1.0]])
    }

    #[test]
    fn holonomic_has_trivial_plastic_factor() {
        let b = body();
        let c = Configuration::holonomic(b.clone(), bent(&b)).unwrap();
        let emb = embodiment_of(&c).unwrap();
        assert!(emb.is_identity(1e-12));
    }

    #[test]
    fn identity_base_returns_the_field() {
        let b = body();
        let field: Vec<LinearMap> = (0..b.num_cells()).map(|k| shear(0.01 * k as f64)).collect();
        let c = Configuration::over_reference(b, field.clone()).unwrap();
        let emb = embodiment_of(&c).unwrap();
        for (a, f) in emb.field().iter().zip(&field) {
            assert!(a.relative_deviation(f) < 1e-15);
        }
    }

    #[test]
    fn multiply_back_reconstructs_field() {
        let b = body();
        let base = bent(&b);
        let pre = Configuration::holonomic(b.clone(), base.clone()).unwrap();
        let field: Vec<LinearMap> = pre
            .field()
            .iter()
            .enumerate()
            .map(|(k, t)| *t * shear(0.1 + 0.02 * k as f64))
            .collect();
        let c = Configuration::new(b, base, field).unwrap();
        let d = decompose(&c).unwrap();
        assert!(d.reconstruction_residual(&c) <= 1e-12);
        assert!(d.anelastic.field().iter().all(|f| f.determinant() > 0.0));
    }

    #[test]
    fn push_forward_identity_and_scaling() {
        let b = body();
        let c = Configuration::over_reference(b.clone(), vec![shear(0.2); b.num_cells()]).unwrap();
        let same = push_forward(&c, &SpaceDiffeo::identity(2)).unwrap();
        assert_eq!(same.base(), c.base());
        assert_eq!(same.field(), c.field());

        let twice = push_forward(
            &c,
            &SpaceDiffeo::affine(LinearMap::scaled_identity(2, 2.0), Vector::zeros(2)).unwrap(),
        )
        .unwrap();
        for (p, q) in twice.base().iter().zip(c.base()) {
            assert_eq!(*p, q.scale(2.0));
        }
        for (f, g) in twice.field().iter().zip(c.field()) {
            assert_eq!(*f, *g * LinearMap::scaled_identity(2, 2.0));
        }
    }

    #[test]
    fn rotation_round_trip() {
        let b = body();
        let c = Configuration::new(b.clone(), bent(&b), vec![shear(0.3); b.num_cells()]).unwrap();
        let rot = AffineMap::new(LinearMap::rotation_2d(std::f64::consts::FRAC_PI_2), v(&[1.0, 2.0])).unwrap();
        let there = push_forward(&c, &rot.into()).unwrap();
        let back = push_forward(&there, &rot.inverse().into()).unwrap();
        for (p, q) in back.base().iter().zip(c.base()) {
            assert!((*p - *q).norm() <= 1e-12 * q.norm().max(1.0));
        }
        for (f, g) in back.field().iter().zip(c.field()) {
            assert!(f.relative_deviation(g) <= 1e-12);
        }
    }

    #[test]
    fn reflection_push_is_rejected() {
        let b = body();
        let c = Configuration::over_reference(b.clone(), vec![LinearMap::identity(2); b.num_cells()]).unwrap();
        let flip = SpaceDiffeo::user(
            "flip",
            2,
            |y: &Vector| v(&[y[0], -y[1]]),
            |_: &Vector| LinearMap::from_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
            &[v(&[0.0, 0.0])],
        );
        // the registration itself refuses orientation reversal
        assert!(flip.is_err());

        // positive at the probe, folding inside the body
        let fold = SpaceDiffeo::user(
            "fold",
            2,
            |y: &Vector| v(&[y[0], y[1] * y[1] * y[1] - 3.0 * y[1]]),
            |y: &Vector| LinearMap::from_rows(&[&[1.0, 0.0], &[0.0, 3.0 * y[1] * y[1] - 3.0]]),
            &[v(&[0.0, 2.0])],
        )
        .unwrap();
        assert!(matches!(
            push_forward(&c, &fold),
            Err(Error::OrientationViolation { .. })
        ));
    }

    #[test]
    fn embodiment_is_invariant_under_affine_push() {
        let b = body();
        let c = Configuration::new(b.clone(), bent(&b), vec![shear(0.25); b.num_cells()]).unwrap();
        let g = AffineMap::new(LinearMap::from_rows(&[&[1.3, -0.4], &[0.2, 0.7]]), v(&[-3.0, 5.0])).unwrap();
        let pushed = push_forward(&c, &g.into()).unwrap();
        let dev = embodiment_of(&c)
            .unwrap()
            .max_deviation(&embodiment_of(&pushed).unwrap())
            .unwrap();
        assert!(dev <= 1e-10, "{dev}");
    }

    #[test]
    fn prescribed_shear_is_recovered() {
        let b = body();
        let base = bent(&b);
        let holo = Configuration::holonomic(b.clone(), base.clone()).unwrap();
        let s = shear(0.4);
        let field = holo.field().iter().map(|t| *t * s).collect();
        let c = Configuration::new(b, base, field).unwrap();
        for f in embodiment_of(&c).unwrap().field() {
            assert!(f.relative_deviation(&s) < 1e-12);
        }
    }

    #[test]
    fn view_i_composite_is_tangent_map() {
        let b = body();
        let base = bent(&b);
        let holo = Configuration::holonomic(b.clone(), base.clone()).unwrap();
        let field: Vec<LinearMap> = holo.field().iter().map(|t| *t * shear(-0.3)).collect();
        let c = Configuration::new(b.clone(), base, field).unwrap();
        let factors = view_i_factors(&c).unwrap();
        for (k, (comp, t)) in factors.composite().iter().zip(c.tangent_map().field()).enumerate() {
            assert!(comp.relative_deviation(t) <= 1e-12, "cell {k}");
        }

        let plain = Configuration::over_reference(b.clone(), vec![shear(0.5); b.num_cells()]).unwrap();
        let f = view_i_factors(&plain).unwrap();
        for (r, comp) in f.release.iter().zip(f.composite()) {
            assert!(r.relative_deviation(&shear(-0.5)) < 1e-15);
            assert!(comp.relative_deviation(&LinearMap::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn mismatched_bodies_are_not_compared() {
        let a =
            embodiment_of(&Configuration::over_reference(body(), vec![LinearMap::identity(2); 18]).unwrap()).unwrap();
        let other = Arc::new(SimplicialBody::grid_2d(2, 2, [0.0, 0.0], [1.0, 1.0]).unwrap());
        let b = embodiment_of(&Configuration::over_reference(other, vec![LinearMap::identity(2); 8]).unwrap()).unwrap();
        assert!(matches!(a.max_deviation(&b), Err(Error::BodyMismatch)));
    }
}
