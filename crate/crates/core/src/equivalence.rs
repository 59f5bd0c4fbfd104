//! Compatibility of configurations, the embodiment partition and reference systems.
//!
//! Bundle configurations over one body are compared through their canonical invariant
//! `F_ae`; no displacement search is needed to decide compatibility. Displacements are
//! only constructed (within the affine group) when a witness is asked for.

use nalgebra::{DMatrix, SVD};

use crate::configuration::Configuration;
use crate::decomposition::{embodiment_of, Embodiment};
use crate::geometry::{bounding_diameter, AffineMap, LinearMap, SpaceDiffeo, Vector};
use crate::{Error, Result};

/// Residual tolerance of an affine fit, relative to the point-set diameter.
pub const AFFINE_FIT_TOLERANCE: f64 = 1e-9;

/// Singular values below this fraction of the largest one count as zero.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct AffineFit {
    /// Orientation-preserving displacement reproducing the correspondence.
    pub map: AffineMap,
    /// Minimum-norm least-squares linear part. Equal to `map.linear()` unless the
    /// correspondence is degenerate, in which case `map` completes it on the directions
    /// the source points do not span.
    pub min_norm_linear: LinearMap,
    /// The source points do not affinely span the space; the displacement is not unique.
    pub degenerate: bool,
    /// Largest point residual `|A k1(X) + c - k2(X)|`.
    pub residual: f64,
}

/// Finds an affine displacement `g` with `g ∘ k1 = k2`, if one exists.
pub fn find_affine_displacement(k1: &[Vector], k2: &[Vector]) -> Result<Option<AffineFit>> {
    if k1.len() != k2.len() {
        return Err(Error::InvalidPointSet(format!(
            "maps of {} and {} points",
            k1.len(),
            k2.len()
        )));
    }
    let Some(first) = k1.first() else {
        return Err(Error::InvalidPointSet("empty protobody".into()));
    };
    let dim = first.dim();
    if k1.iter().chain(k2).any(|p| p.dim() != dim) {
        return Err(Error::Dimension("points of mixed dimension".into()));
    }
    let npts = k1.len();
    let mean = |pts: &[Vector]| {
        pts.iter()
            .fold(Vector::zeros(dim), |acc, p| acc + *p)
            .scale(1.0 / npts as f64)
    };
    let (m1, m2) = (mean(k1), mean(k2));
    let src = DMatrix::from_fn(npts, dim, |r, c| k1[r][c] - m1[c]);
    let dst = DMatrix::from_fn(npts, dim, |r, c| k2[r][c] - m2[c]);

    // min-norm solution of src * A^T = dst
    let svd = SVD::new(src, true, true);
    let smax = svd.singular_values.max();
    let cutoff = RANK_TOLERANCE * smax.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let at = svd
        .solve(&dst, cutoff)
        .map_err(|e| Error::InvalidPointSet(e.to_string()))?;
    let mut min_norm = LinearMap::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            min_norm.set(i, j, at[(j, i)]);
        }
    }
    let degenerate = rank < dim;
    let linear = if degenerate {
        let v_t = svd.v_t.as_ref().expect("requested");
        // right singular vectors of the unused directions
        let null: Vec<Vector> = (0..dim)
            .filter(|&k| k >= svd.singular_values.len() || svd.singular_values[k] <= cutoff)
            .map(|k| Vector::from_slice(v_t.row(k).transpose().as_slice()))
            .collect();
        match complete_orientation(&min_norm, &null) {
            Some(a) => a,
            None => return Ok(None),
        }
    } else {
        min_norm
    };
    if !(linear.determinant() > 0.0) {
        return Ok(None);
    }
    let offset = m2 - linear.apply(&m1);
    let residual = k1
        .iter()
        .zip(k2)
        .map(|(p, q)| (linear.apply(p) + offset - *q).norm())
        .fold(0.0, f64::max);
    let scale = point_scale(k1, k2);
    if !(residual <= AFFINE_FIT_TOLERANCE * scale) {
        return Ok(None);
    }
    let map = AffineMap::new(linear, offset)?;
    Ok(Some(AffineFit {
        map,
        min_norm_linear: min_norm,
        degenerate,
        residual,
    }))
}

/// Length scale for point comparisons: the larger diameter, or the coordinate magnitude
/// when both sets are single points.
pub(crate) fn point_scale(k1: &[Vector], k2: &[Vector]) -> f64 {
    let d = bounding_diameter(k1).max(bounding_diameter(k2));
    if d > 0.0 {
        d
    } else {
        k1.iter().chain(k2).map(Vector::max_abs).fold(1.0, f64::max)
    }
}

/// Adds an isometry from the unused source directions onto the directions missed by
/// `min_norm`, picking the sign that makes the determinant positive.
fn complete_orientation(min_norm: &LinearMap, null: &[Vector]) -> Option<LinearMap> {
    let dim = min_norm.dim();
    let m = DMatrix::from_fn(dim, dim, |i, j| min_norm.get(i, j));
    let svd = SVD::new(m, true, false);
    let u = svd.u.as_ref().expect("requested");
    let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let mut missed: Vec<usize> = (0..dim)
        .filter(|&k| svd.singular_values[k] <= RANK_TOLERANCE * smax)
        .collect();
    if svd.singular_values.max() == 0.0 {
        missed = (0..dim).collect();
    }
    if missed.len() < null.len() {
        return None;
    }
    let build = |sign: f64| {
        let mut a = *min_norm;
        for (k, n) in null.iter().enumerate() {
            let col = missed[k];
            let s = if k == 0 { sign } else { 1.0 };
            for i in 0..dim {
                for j in 0..dim {
                    a.set(i, j, a.get(i, j) + s * u[(i, col)] * n[j]);
                }
            }
        }
        a
    };
    let plus = build(1.0);
    if plus.determinant() > 0.0 {
        return Some(plus);
    }
    let minus = build(-1.0);
    (minus.determinant() > 0.0).then_some(minus)
}

/// Largest cellwise deviation of the two embodiments.
pub fn embodiment_deviation(c1: &Configuration, c2: &Configuration) -> Result<f64> {
    if !c1.same_body(c2) {
        return Err(Error::BodyMismatch);
    }
    embodiment_of(c1)?.max_deviation(&embodiment_of(c2)?)
}

/// `(T base_1)^-1 field_1 = (T base_2)^-1 field_2` cellwise within `tol`.
pub fn are_compatible(c1: &Configuration, c2: &Configuration, tol: f64) -> Result<bool> {
    Ok(embodiment_deviation(c1, c2)? <= tol)
}

/// One compatibility class; `representative` is its lowest input index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbodimentClass {
    pub representative: usize,
    pub members: Vec<usize>,
}

/// Partitions configurations into embodiments, classes ordered by representative.
pub fn partition_into_embodiments(configs: &[Configuration], tol: f64) -> Result<Vec<EmbodimentClass>> {
    if let Some(first) = configs.first() {
        if configs.iter().any(|c| !c.same_body(first)) {
            return Err(Error::BodyMismatch);
        }
    }
    let invariants: Vec<Embodiment> = configs.iter().map(embodiment_of).collect::<Result<_>>()?;
    let mut classes: Vec<EmbodimentClass> = Vec::new();
    for (i, inv) in invariants.iter().enumerate() {
        let mut joined = false;
        for class in classes.iter_mut() {
            if invariants[class.representative].max_deviation(inv)? <= tol {
                class.members.push(i);
                joined = true;
                break;
            }
        }
        if !joined {
            classes.push(EmbodimentClass {
                representative: i,
                members: vec![i],
            });
        }
    }
    Ok(classes)
}

/// How the base map of a class representative relates to the first class's base map.
#[derive(Clone, Debug)]
pub enum BaseWitness {
    Affine(Box<AffineFit>),
    /// The bases are embeddings of the same body and hence related by a diffeomorphism,
    /// but not by an affine one; no witness is constructed.
    NonAffine,
}

#[derive(Clone, Debug)]
pub struct BaseWitnessEntry {
    pub class: usize,
    pub representative: usize,
    pub witness: BaseWitness,
}

/// The map from embodiments to base embodiments. With embedded base maps every class
/// lands on the single base embodiment, so the image has one element.
#[derive(Clone, Debug)]
pub struct BaseEmbodimentReport {
    pub image_size: usize,
    pub entries: Vec<BaseWitnessEntry>,
    /// More than one class shares the base embodiment: the fibers differ while the
    /// bases are equivalent.
    pub fibers_differ: bool,
}

pub fn base_embodiment_map(configs: &[Configuration], classes: &[EmbodimentClass]) -> Result<BaseEmbodimentReport> {
    let Some(first) = classes.first() else {
        return Ok(BaseEmbodimentReport {
            image_size: 0,
            entries: Vec::new(),
            fibers_differ: false,
        });
    };
    let reference = configs[first.representative].base();
    let entries = classes
        .iter()
        .enumerate()
        .map(|(k, class)| {
            let base = configs[class.representative].base();
            let witness = match find_affine_displacement(reference, base)? {
                Some(fit) => BaseWitness::Affine(Box::new(fit)),
                None => BaseWitness::NonAffine,
            };
            Ok(BaseWitnessEntry {
                class: k,
                representative: class.representative,
                witness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BaseEmbodimentReport {
        image_size: 1,
        entries,
        fibers_differ: classes.len() > 1,
    })
}

#[derive(Clone, Debug)]
pub enum ReferenceChooser {
    LowestIndex,
    /// One configuration index per class, in class order.
    Provided(Vec<usize>),
}

/// A chosen reference configuration for every embodiment.
#[derive(Clone, Debug)]
pub struct ReferenceSystem {
    classes: Vec<EmbodimentClass>,
    assignment: Vec<usize>,
}

impl ReferenceSystem {
    /// Reference configuration index of each class.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn class_of(&self, member: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.members.contains(&member))
    }

    pub fn reference_for(&self, member: usize) -> Option<usize> {
        self.class_of(member).map(|k| self.assignment[k])
    }

    /// The displacement carrying the member's reference configuration to the member,
    /// when it is affine. The fiber fields are checked too, so a returned fit `g`
    /// satisfies `push_forward(reference, g) = member`.
    pub fn deformation_to_reference(
        &self,
        configs: &[Configuration],
        member: usize,
        tol: f64,
    ) -> Result<Option<AffineFit>> {
        let Some(r) = self.reference_for(member) else {
            return Err(Error::InvalidPointSet(format!(
                "configuration {member} is not in any class"
            )));
        };
        let (reference, target) = (&configs[r], &configs[member]);
        let Some(fit) = find_affine_displacement(reference.base(), target.base())? else {
            return Ok(None);
        };
        let a = fit.map.linear();
        let fields_match = reference
            .field()
            .iter()
            .zip(target.field())
            .all(|(f, t)| (*a * *f).relative_deviation(t) <= tol);
        Ok(fields_match.then_some(fit))
    }
}

pub fn assign_references(
    configs: &[Configuration],
    classes: &[EmbodimentClass],
    chooser: &ReferenceChooser,
    tol: f64,
) -> Result<ReferenceSystem> {
    let assignment = match chooser {
        ReferenceChooser::LowestIndex => classes.iter().map(|c| c.representative).collect(),
        ReferenceChooser::Provided(choice) => {
            if choice.len() != classes.len() {
                return Err(Error::InvalidPointSet(format!(
                    "{} references for {} classes",
                    choice.len(),
                    classes.len()
                )));
            }
            for (k, (&index, class)) in choice.iter().zip(classes).enumerate() {
                let member = class.members.contains(&index)
                    && index < configs.len()
                    && are_compatible(&configs[index], &configs[class.representative], tol)?;
                if !member {
                    return Err(Error::ProvidedRepresentativeNotInClass { class: k, index });
                }
            }
            choice.clone()
        }
    };
    Ok(ReferenceSystem {
        classes: classes.to_vec(),
        assignment,
    })
}

/// Displacement group used to relate point configurations.
#[derive(Clone, Debug)]
pub enum GroupSpec {
    /// The affine group, searched constructively.
    Affine,
    /// An explicit finite list of displacements.
    Explicit(Vec<SpaceDiffeo>),
}

/// Finite configurations of a finite protobody: plain maps of labeled points into space.
/// Configurations need not be injective.
#[derive(Clone, Debug)]
pub struct PointConfigurationSet {
    labels: Vec<String>,
    configs: Vec<Vec<Vector>>,
    group: GroupSpec,
}

impl PointConfigurationSet {
    pub fn new(labels: Vec<String>, configs: Vec<Vec<Vector>>, group: GroupSpec) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidPointSet("empty protobody".into()));
        }
        let dim = configs.first().and_then(|c| c.first()).map(Vector::dim).unwrap_or(2);
        for (k, c) in configs.iter().enumerate() {
            if c.len() != labels.len() {
                return Err(Error::InvalidPointSet(format!(
                    "configuration {k} maps {} of {} points",
                    c.len(),
                    labels.len()
                )));
            }
            if c.iter().any(|p| p.dim() != dim) {
                return Err(Error::Dimension(format!("configuration {k} mixes dimensions")));
            }
        }
        if let GroupSpec::Explicit(gs) = &group {
            if gs.iter().any(|g| g.dim() != dim) {
                return Err(Error::Dimension("displacement of the wrong dimension".into()));
            }
        }
        Ok(PointConfigurationSet { labels, configs, group })
    }

    /// Protobody points labeled `0..n`.
    pub fn unlabeled(configs: Vec<Vec<Vector>>, group: GroupSpec) -> Result<Self> {
        let n = configs.first().map(Vec::len).unwrap_or(0);
        Self::new((0..n).map(|i| i.to_string()).collect(), configs, group)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn configs(&self) -> &[Vec<Vector>] {
        &self.configs
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.configs
            .first()
            .and_then(|c| c.first())
            .map(Vector::dim)
            .unwrap_or(2)
    }

    /// A displacement `g` of the group with `g ∘ configs[from] = configs[to]`, if found.
    pub fn displacement(&self, from: usize, to: usize) -> Result<Option<SpaceDiffeo>> {
        let (k1, k2) = (&self.configs[from], &self.configs[to]);
        match &self.group {
            GroupSpec::Affine => Ok(find_affine_displacement(k1, k2)?.map(|fit| SpaceDiffeo::Affine(fit.map))),
            GroupSpec::Explicit(gs) => {
                let tol = AFFINE_FIT_TOLERANCE * point_scale(k1, k2);
                Ok(gs
                    .iter()
                    .find(|g| k1.iter().zip(k2).all(|(p, q)| (g.apply(p) - *q).norm() <= tol))
                    .cloned())
            }
        }
    }
}
