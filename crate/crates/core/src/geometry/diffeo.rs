use std::fmt;
use std::sync::Arc;

use super::linalg::{LinearMap, Vector};
use crate::{Error, Result};

/// Relative tolerance for the finite-difference check of a user tangent rule.
pub const TANGENT_CHECK_TOLERANCE: f64 = 1e-5;

/// An orientation-preserving affine map `y -> A y + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    linear: LinearMap,
    translation: Vector,
}

impl AffineMap {
    pub fn new(linear: LinearMap, translation: Vector) -> Result<Self> {
        if linear.dim() != translation.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix with a {}-vector translation",
                linear.dim(),
                linear.dim(),
                translation.dim()
            )));
        }
        let det = linear.determinant();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::InvalidDiffeo(format!(
                "affine part has det = {det:e}, must be positive"
            )));
        }
        Ok(AffineMap { linear, translation })
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap {
            linear: LinearMap::identity(dim),
            translation: Vector::zeros(dim),
        }
    }

    pub fn translation(c: Vector) -> Self {
        AffineMap {
            linear: LinearMap::identity(c.dim()),
            translation: c,
        }
    }

    pub fn linear(&self) -> &LinearMap {
        &self.linear
    }

    pub fn offset(&self) -> &Vector {
        &self.translation
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn apply(&self, y: &Vector) -> Vector {
        self.linear.apply(y) + self.translation
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            linear: self.linear * inner.linear,
            translation: self.linear.apply(&inner.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = self.linear.inverse().expect("affine maps are constructed with det > 0");
        AffineMap {
            linear: inv,
            translation: -inv.apply(&self.translation),
        }
    }
}

type PointRule = dyn Fn(&Vector) -> Vector + Send + Sync;
type TangentRule = dyn Fn(&Vector) -> LinearMap + Send + Sync;

/// A user-supplied diffeomorphism together with its exact tangent rule.
#[derive(Clone)]
pub struct UserDiffeo {
    name: String,
    dim: usize,
    map: Arc<PointRule>,
    tangent: Arc<TangentRule>,
}

impl fmt::Debug for UserDiffeo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserDiffeo")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

/// An element of the displacement group acting on the space chart.
#[derive(Clone, Debug)]
pub enum SpaceDiffeo {
    Affine(AffineMap),
    User(UserDiffeo),
}

impl From<AffineMap> for SpaceDiffeo {
    fn from(a: AffineMap) -> Self {
        SpaceDiffeo::Affine(a)
    }
}

impl SpaceDiffeo {
    pub fn identity(dim: usize) -> Self {
        SpaceDiffeo::Affine(AffineMap::identity(dim))
    }

    pub fn affine(linear: LinearMap, translation: Vector) -> Result<Self> {
        AffineMap::new(linear, translation).map(SpaceDiffeo::Affine)
    }

    /// Registers a user diffeomorphism.
    ///
    /// The tangent rule is spot-checked against central differences of `map` at every
    /// probe point and must have positive determinant there.
    pub fn user<M, T>(name: impl Into<String>, dim: usize, map: M, tangent: T, probes: &[Vector]) -> Result<Self>
    where
        M: Fn(&Vector) -> Vector + Send + Sync + 'static,
        T: Fn(&Vector) -> LinearMap + Send + Sync + 'static,
    {
        let name = name.into();
        if probes.is_empty() {
            return Err(Error::InvalidDiffeo(format!("{name}: no probe points")));
        }
        for y in probes {
            if y.dim() != dim {
                return Err(Error::Dimension(format!(
                    "{name}: probe of dimension {} for a {dim}-d map",
                    y.dim()
                )));
            }
            let exact = tangent(y);
            let det = exact.determinant();
            if !(det > 0.0) {
                return Err(Error::InvalidDiffeo(format!(
                    "{name}: tangent at {y:?} has det = {det:e}"
                )));
            }
            let fd = central_difference(&map, y);
            let err = (exact - fd).frobenius_norm() / exact.frobenius_norm().max(1.0);
            if !(err <= TANGENT_CHECK_TOLERANCE) {
                return Err(Error::InvalidDiffeo(format!(
                    "{name}: tangent rule disagrees with finite differences at {y:?} \
                     (relative error {err:e})"
                )));
            }
        }
        Ok(SpaceDiffeo::User(UserDiffeo {
            name,
            dim,
            map: Arc::new(map),
            tangent: Arc::new(tangent),
        }))
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceDiffeo::Affine(a) => a.dim(),
            SpaceDiffeo::User(u) => u.dim,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            SpaceDiffeo::Affine(_) => "affine",
            SpaceDiffeo::User(u) => &u.name,
        }
    }

    pub fn as_affine(&self) -> Option<&AffineMap> {
        match self {
            SpaceDiffeo::Affine(a) => Some(a),
            SpaceDiffeo::User(_) => None,
        }
    }

    /// Point action `g(y)`.
    pub fn apply(&self, y: &Vector) -> Vector {
        match self {
            SpaceDiffeo::Affine(a) => a.apply(y),
            SpaceDiffeo::User(u) => (u.map)(y),
        }
    }

    /// Tangent map `Tg(y)` as a matrix.
    pub fn tangent_at(&self, y: &Vector) -> LinearMap {
        match self {
            SpaceDiffeo::Affine(a) => *a.linear(),
            SpaceDiffeo::User(u) => (u.tangent)(y),
        }
    }

    /// Tangent action `Tg(y) v`.
    pub fn apply_tangent(&self, y: &Vector, v: &Vector) -> Vector {
        self.tangent_at(y).apply(v)
    }
}

fn central_difference<M: Fn(&Vector) -> Vector>(map: &M, y: &Vector) -> LinearMap {
    let dim = y.dim();
    let h = 1e-6 * y.max_abs().max(1.0);
    let cols: Vec<Vector> = (0..dim)
        .map(|j| {
            let mut yp = *y;
            let mut ym = *y;
            yp[j] += h;
            ym[j] -= h;
            (map(&yp) - map(&ym)).scale(0.5 / h)
        })
        .collect();
    LinearMap::from_columns(&cols)
}
