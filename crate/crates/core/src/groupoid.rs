//! Finite groupoids: table axioms, orbits, the groupoid of point configurations and the
//! body points of an embodiment as orbits of placed points.

use std::collections::{BTreeMap, HashMap};

use crate::equivalence::{point_scale, PointConfigurationSet, AFFINE_FIT_TOLERANCE};
use crate::geometry::{AffineMap, SpaceDiffeo, Vector};
use crate::{Error, Result};

pub const DEFAULT_CLOSURE_BOUND: usize = 100_000;

/// A finite groupoid given by raw tables.
///
/// The tables are not validated on construction; [`FiniteGroupoid::verify_axioms`]
/// reports every way they fail to form a groupoid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    pub num_objects: usize,
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    /// Identity morphism of each object.
    pub identity: Vec<usize>,
    pub inverse: Vec<Option<usize>>,
    /// `(m2, m1) -> m2 · m1`, defined when `target[m1] == source[m2]`.
    pub compose: HashMap<(usize, usize), usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub passed: bool,
    /// The violating morphism (or object) tuple of the first failure found.
    pub counterexample: Option<Vec<usize>>,
    pub detail: Option<String>,
}

impl AxiomCheck {
    fn pass() -> Self {
        AxiomCheck {
            passed: true,
            counterexample: None,
            detail: None,
        }
    }

    fn fail(tuple: Vec<usize>, detail: String) -> Self {
        AxiomCheck {
            passed: false,
            counterexample: Some(tuple),
            detail: Some(detail),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub surjectivity: AxiomCheck,
    pub composition: AxiomCheck,
    pub associativity: AxiomCheck,
    pub identity: AxiomCheck,
    pub inverse: AxiomCheck,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.passed)
    }

    pub fn checks(&self) -> [(&'static str, &AxiomCheck); 5] {
        [
            ("surjectivity", &self.surjectivity),
            ("composition", &self.composition),
            ("associativity", &self.associativity),
            ("identity", &self.identity),
            ("inverse", &self.inverse),
        ]
    }
}

impl FiniteGroupoid {
    /// Only identity morphisms.
    pub fn identity_only(num_objects: usize) -> Self {
        let ids: Vec<usize> = (0..num_objects).collect();
        FiniteGroupoid {
            num_objects,
            source: ids.clone(),
            target: ids.clone(),
            identity: ids.clone(),
            inverse: ids.iter().map(|&m| Some(m)).collect(),
            compose: ids.iter().map(|&m| ((m, m), m)).collect(),
        }
    }

    /// One morphism per ordered pair of objects.
    pub fn pair(num_objects: usize) -> Self {
        let mut b = PairBuilder::new(num_objects);
        for a in 0..num_objects {
            for c in 0..num_objects {
                b.add(a, c);
            }
        }
        b.finish()
    }

    pub fn num_morphisms(&self) -> usize {
        self.source.len()
    }

    pub fn is_composable(&self, m2: usize, m1: usize) -> bool {
        self.target[m1] == self.source[m2]
    }

    pub fn verify_axioms(&self) -> AxiomReport {
        let n = self.num_morphisms();
        if let Some(check) = self.table_shape() {
            let fail = || check.clone();
            return AxiomReport {
                surjectivity: fail(),
                composition: fail(),
                associativity: fail(),
                identity: fail(),
                inverse: fail(),
            };
        }
        let by_source = self.by_source();

        let surjectivity = (0..self.num_objects)
            .find(|&o| !self.source.contains(&o) || !self.target.contains(&o))
            .map_or_else(AxiomCheck::pass, |o| {
                AxiomCheck::fail(vec![o], format!("object {o} is not both a source and a target"))
            });

        let composition = self.check_composition(&by_source);
        let associativity = self.check_associativity(&by_source);

        let identity = (|| {
            for o in 0..self.num_objects {
                let e = self.identity[o];
                if self.source[e] != o || self.target[e] != o {
                    return AxiomCheck::fail(vec![o, e], format!("identity {e} of object {o} is not a loop at {o}"));
                }
            }
            for m in 0..n {
                let right = self.identity[self.source[m]];
                let left = self.identity[self.target[m]];
                if self.compose.get(&(m, right)) != Some(&m) {
                    return AxiomCheck::fail(vec![m, right], format!("{m} · ε ≠ {m}"));
                }
                if self.compose.get(&(left, m)) != Some(&m) {
                    return AxiomCheck::fail(vec![left, m], format!("ε · {m} ≠ {m}"));
                }
            }
            AxiomCheck::pass()
        })();

        let inverse = (|| {
            for m in 0..n {
                let Some(inv) = self.inverse[m] else {
                    return AxiomCheck::fail(vec![m], format!("morphism {m} has no inverse"));
                };
                let src_id = self.identity[self.source[m]];
                let tgt_id = self.identity[self.target[m]];
                if self.compose.get(&(inv, m)) != Some(&src_id) {
                    return AxiomCheck::fail(vec![inv, m], format!("{inv} · {m} is not the source identity"));
                }
                if self.compose.get(&(m, inv)) != Some(&tgt_id) {
                    return AxiomCheck::fail(vec![m, inv], format!("{m} · {inv} is not the target identity"));
                }
            }
            AxiomCheck::pass()
        })();

        AxiomReport {
            surjectivity,
            composition,
            associativity,
            identity,
            inverse,
        }
    }

    /// Index-range and length errors that make the remaining checks meaningless.
    fn table_shape(&self) -> Option<AxiomCheck> {
        let n = self.num_morphisms();
        if self.target.len() != n || self.inverse.len() != n || self.identity.len() != self.num_objects {
            return Some(AxiomCheck::fail(vec![], "table lengths disagree".into()));
        }
        for m in 0..n {
            if self.source[m] >= self.num_objects || self.target[m] >= self.num_objects {
                return Some(AxiomCheck::fail(
                    vec![m],
                    format!("morphism {m} has an endpoint out of range"),
                ));
            }
            if matches!(self.inverse[m], Some(i) if i >= n) {
                return Some(AxiomCheck::fail(vec![m], format!("inverse of {m} out of range")));
            }
        }
        if let Some(o) = (0..self.num_objects).find(|&o| self.identity[o] >= n) {
            return Some(AxiomCheck::fail(
                vec![o],
                format!("identity of object {o} out of range"),
            ));
        }
        if let Some((&(a, b), &c)) = self.compose.iter().find(|(&(a, b), &c)| a >= n || b >= n || c >= n) {
            return Some(AxiomCheck::fail(vec![a, b, c], "composition entry out of range".into()));
        }
        None
    }

    fn by_source(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_objects];
        for m in 0..self.num_morphisms() {
            out[self.source[m]].push(m);
        }
        out
    }

    fn check_composition(&self, by_source: &[Vec<usize>]) -> AxiomCheck {
        let mut stray: Vec<(&(usize, usize), &usize)> = self
            .compose
            .iter()
            .filter(|(&(m2, m1), _)| !self.is_composable(m2, m1))
            .collect();
        stray.sort();
        if let Some((&(m2, m1), _)) = stray.first() {
            return AxiomCheck::fail(vec![m2, m1], format!("{m2} · {m1} is defined but not composable"));
        }
        for m1 in 0..self.num_morphisms() {
            for &m2 in &by_source[self.target[m1]] {
                match self.compose.get(&(m2, m1)) {
                    None => {
                        return AxiomCheck::fail(vec![m2, m1], format!("{m2} · {m1} is missing"));
                    }
                    Some(&m) if self.source[m] != self.source[m1] || self.target[m] != self.target[m2] => {
                        return AxiomCheck::fail(vec![m2, m1, m], format!("{m2} · {m1} = {m} has the wrong endpoints"));
                    }
                    Some(_) => {}
                }
            }
        }
        AxiomCheck::pass()
    }

    fn check_associativity(&self, by_source: &[Vec<usize>]) -> AxiomCheck {
        let n = self.num_morphisms();
        let workers = std::thread::available_parallelism()
            .map_or(1, |p| p.get())
            .min(n.max(1));
        let chunk = n.div_ceil(workers.max(1)).max(1);
        let first_failure = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..n)
                .step_by(chunk)
                .map(|start| {
                    scope.spawn(move || {
                        for m1 in start..(start + chunk).min(n) {
                            if let Some(f) = self.associativity_from(m1, by_source) {
                                return Some(f);
                            }
                        }
                        None
                    })
                })
                .collect();
            handles
                .into_iter()
                .filter_map(|h| h.join().expect("associativity worker panicked"))
                .next()
        });
        match first_failure {
            Some(t) => AxiomCheck::fail(
                t.clone(),
                format!(
                    "({} · {}) · {} differs from {} · ({} · {})",
                    t[0], t[1], t[2], t[0], t[1], t[2]
                ),
            ),
            None => AxiomCheck::pass(),
        }
    }

    fn associativity_from(&self, m1: usize, by_source: &[Vec<usize>]) -> Option<Vec<usize>> {
        for &m2 in &by_source[self.target[m1]] {
            let Some(&m21) = self.compose.get(&(m2, m1)) else {
                continue;
            };
            for &m3 in &by_source[self.target[m2]] {
                let Some(&m32) = self.compose.get(&(m3, m2)) else {
                    continue;
                };
                let left = self.compose.get(&(m32, m1));
                let right = self.compose.get(&(m3, m21));
                if left != right || left.is_none() {
                    return Some(vec![m3, m2, m1]);
                }
            }
        }
        None
    }

    /// Connected classes of objects, each sorted, ordered by lowest member.
    pub fn orbits(&self) -> Result<Vec<Vec<usize>>> {
        if !self.verify_axioms().all_passed() {
            return Err(Error::AxiomsNotVerified);
        }
        let mut uf = UnionFind::new(self.num_objects);
        for m in 0..self.num_morphisms() {
            uf.union(self.source[m], self.target[m]);
        }
        Ok(uf.classes())
    }
}

/// Builds a groupoid with at most one morphism per ordered pair of objects.
struct PairBuilder {
    num_objects: usize,
    index: BTreeMap<(usize, usize), usize>,
    ends: Vec<(usize, usize)>,
}

impl PairBuilder {
    fn new(num_objects: usize) -> Self {
        let mut b = PairBuilder {
            num_objects,
            index: BTreeMap::new(),
            ends: Vec::new(),
        };
        for o in 0..num_objects {
            b.add(o, o);
        }
        b
    }

    fn get(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&(a, b)).copied()
    }

    /// Returns the morphism `a -> b` and whether it is new.
    fn add(&mut self, a: usize, b: usize) -> (usize, bool) {
        if let Some(m) = self.get(a, b) {
            return (m, false);
        }
        let m = self.ends.len();
        self.ends.push((a, b));
        self.index.insert((a, b), m);
        (m, true)
    }

    fn finish(self) -> FiniteGroupoid {
        let source: Vec<usize> = self.ends.iter().map(|e| e.0).collect();
        let target: Vec<usize> = self.ends.iter().map(|e| e.1).collect();
        let mut outgoing = vec![Vec::new(); self.num_objects];
        for (m, &(a, _)) in self.ends.iter().enumerate() {
            outgoing[a].push(m);
        }
        let mut compose = HashMap::new();
        for (m1, &(a, b)) in self.ends.iter().enumerate() {
            for &m2 in &outgoing[b] {
                let c = self.ends[m2].1;
                compose.insert((m2, m1), self.index[&(a, c)]);
            }
        }
        FiniteGroupoid {
            num_objects: self.num_objects,
            identity: (0..self.num_objects).map(|o| self.index[&(o, o)]).collect(),
            inverse: self
                .ends
                .iter()
                .map(|&(a, b)| self.index.get(&(b, a)).copied())
                .collect(),
            source,
            target,
            compose,
        }
    }
}

/// How a morphism of the configuration groupoid was obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessKind {
    Identity,
    /// Found by the displacement search (affine fit or a listed displacement).
    Found,
    Inverse(usize),
    /// `Composite(m2, m1)` is `m2 · m1`.
    Composite(usize, usize),
}

#[derive(Clone, Debug)]
pub struct MorphismWitness {
    pub kind: WitnessKind,
    /// The displacement itself when it was found directly.
    pub displacement: Option<SpaceDiffeo>,
    /// The affine displacement, when every ingredient is affine.
    pub affine: Option<AffineMap>,
}

/// The groupoid `Γ ⇉ Q` of a finite configuration family together with the
/// witnesses of its morphisms.
///
/// Morphisms are restrictions of displacements to configuration images, so two
/// displacements acting alike on the images give the same morphism and there is at
/// most one morphism per ordered pair of configurations.
#[derive(Clone, Debug)]
pub struct ConfigurationGroupoid {
    pub groupoid: FiniteGroupoid,
    pub witnesses: Vec<MorphismWitness>,
}

pub fn configuration_groupoid(pcs: &PointConfigurationSet) -> Result<ConfigurationGroupoid> {
    configuration_groupoid_bounded(pcs, DEFAULT_CLOSURE_BOUND)
}

pub fn configuration_groupoid_bounded(pcs: &PointConfigurationSet, bound: usize) -> Result<ConfigurationGroupoid> {
    let n = pcs.configs().len();
    let mut builder = PairBuilder::new(n);
    let mut witnesses: Vec<MorphismWitness> = (0..n)
        .map(|_| MorphismWitness {
            kind: WitnessKind::Identity,
            displacement: None,
            affine: Some(AffineMap::identity(pcs.dim())),
        })
        .collect();
    let check_bound = |count: usize| {
        if count > bound {
            Err(Error::ClosureExplosion { bound })
        } else {
            Ok(())
        }
    };
    check_bound(witnesses.len())?;

    for i in 0..n {
        for j in 0..n {
            if i == j || builder.get(i, j).is_some() {
                continue;
            }
            let Some(g) = pcs.displacement(i, j)? else { continue };
            let affine = g.as_affine().copied();
            let (m, _) = builder.add(i, j);
            witnesses.push(MorphismWitness {
                kind: WitnessKind::Found,
                displacement: Some(g),
                affine,
            });
            check_bound(witnesses.len())?;
            let (_, fresh) = builder.add(j, i);
            if fresh {
                witnesses.push(MorphismWitness {
                    kind: WitnessKind::Inverse(m),
                    displacement: None,
                    affine: affine.map(|a| a.inverse()),
                });
                check_bound(witnesses.len())?;
            }
        }
    }

    // close under composition; inverses of composites are composites of inverses
    loop {
        let mut added = false;
        let ends = builder.ends.clone();
        let mut outgoing = vec![Vec::new(); n];
        for (m, &(a, _)) in ends.iter().enumerate() {
            outgoing[a].push(m);
        }
        for (m1, &(a, b)) in ends.iter().enumerate() {
            for &m2 in &outgoing[b] {
                let c = ends[m2].1;
                let (_, fresh) = builder.add(a, c);
                if fresh {
                    let affine = match (&witnesses[m2].affine, &witnesses[m1].affine) {
                        (Some(g2), Some(g1)) => Some(g2.compose(g1)),
                        _ => None,
                    };
                    witnesses.push(MorphismWitness {
                        kind: WitnessKind::Composite(m2, m1),
                        displacement: None,
                        affine,
                    });
                    check_bound(witnesses.len())?;
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }

    Ok(ConfigurationGroupoid {
        groupoid: builder.finish(),
        witnesses,
    })
}

impl ConfigurationGroupoid {
    /// Directly found displacements as body-point witnesses.
    pub fn found_witnesses(&self) -> Vec<PointWitness> {
        self.witnesses
            .iter()
            .enumerate()
            .filter_map(|(m, w)| {
                let g = w.displacement.clone()?;
                Some(PointWitness {
                    from: self.groupoid.source[m],
                    to: self.groupoid.target[m],
                    displacement: g,
                })
            })
            .collect()
    }
}

/// A recorded displacement `g` with `g ∘ κ_from = κ_to`.
#[derive(Clone, Debug)]
pub struct PointWitness {
    pub from: usize,
    pub to: usize,
    pub displacement: SpaceDiffeo,
}

/// The disjoint union of configuration images: pairs `(y, κ)` with `y` in `Image κ`.
#[derive(Clone, Debug)]
pub struct PlacedPointSet {
    elements: Vec<(Vector, usize)>,
    /// Element indices of each configuration's image.
    by_config: Vec<Vec<usize>>,
}

impl PlacedPointSet {
    /// Collects the distinct image points of each configuration.
    pub fn from_configs(configs: &[Vec<Vector>], tol: f64) -> Self {
        let mut elements: Vec<(Vector, usize)> = Vec::new();
        let mut by_config = Vec::with_capacity(configs.len());
        for (k, c) in configs.iter().enumerate() {
            let mut mine: Vec<usize> = Vec::new();
            for p in c {
                if !mine.iter().any(|&e| (elements[e].0 - *p).norm() <= tol) {
                    mine.push(elements.len());
                    elements.push((*p, k));
                }
            }
            by_config.push(mine);
        }
        PlacedPointSet { elements, by_config }
    }

    /// Builds the set from explicit pairs, checking image membership.
    pub fn new(configs: &[Vec<Vector>], pairs: Vec<(Vector, usize)>, tol: f64) -> Result<Self> {
        let mut by_config = vec![Vec::new(); configs.len()];
        for (e, (y, k)) in pairs.iter().enumerate() {
            let member = configs
                .get(*k)
                .is_some_and(|c| c.iter().any(|p| (*p - *y).norm() <= tol));
            if !member {
                return Err(Error::InvalidPointSet(format!(
                    "point {y:?} is not in the image of configuration {k}"
                )));
            }
            by_config[*k].push(e);
        }
        Ok(PlacedPointSet {
            elements: pairs,
            by_config,
        })
    }

    pub fn elements(&self) -> &[(Vector, usize)] {
        &self.elements
    }

    /// Element indices lying over one configuration.
    pub fn image_of(&self, config: usize) -> &[usize] {
        &self.by_config[config]
    }

    fn find(&self, config: usize, y: &Vector, tol: f64) -> Option<usize> {
        self.by_config[config]
            .iter()
            .copied()
            .find(|&e| (self.elements[e].0 - *y).norm() <= tol)
    }
}

/// Body points of one embodiment as orbits of placed points.
#[derive(Clone, Debug)]
pub struct BodyPoints {
    pub placed: PlacedPointSet,
    /// Orbits as element indices, ordered by lowest element.
    pub orbits: Vec<Vec<usize>>,
    /// For each configuration, the orbit of each of its image elements (in
    /// `placed.image_of(k)` order).
    pub projections: Vec<Vec<usize>>,
    /// Whether each projection is a bijection onto the orbit list.
    pub bijective: Vec<bool>,
}

impl BodyPoints {
    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// Body point of a placed point `y` of configuration `k`.
    pub fn project(&self, k: usize, y: &Vector, tol: f64) -> Option<usize> {
        let e = self.placed.find(k, y, tol)?;
        let pos = self.placed.image_of(k).iter().position(|&x| x == e)?;
        Some(self.projections[k][pos])
    }
}

/// Identifies `(y, κ_i)` with `(g(y), κ_j)` for every recorded witness and returns the
/// resulting orbits.
pub fn body_points(configs: &[Vec<Vector>], witnesses: &[PointWitness]) -> Result<BodyPoints> {
    let all: Vec<Vector> = configs.iter().flatten().copied().collect();
    let tol = AFFINE_FIT_TOLERANCE * point_scale(&all, &all);
    let placed = PlacedPointSet::from_configs(configs, tol);
    let mut uf = UnionFind::new(placed.elements.len());
    for w in witnesses {
        if w.from >= configs.len() || w.to >= configs.len() {
            return Err(Error::InvalidPointSet(format!(
                "witness between configurations {} and {} of {}",
                w.from,
                w.to,
                configs.len()
            )));
        }
        for &e in placed.image_of(w.from) {
            let moved = w.displacement.apply(&placed.elements[e].0);
            let Some(f) = placed.find(w.to, &moved, tol) else {
                return Err(Error::WitnessInconsistency {
                    from: w.from,
                    to: w.to,
                    point: moved.as_slice().to_vec(),
                });
            };
            uf.union(e, f);
        }
    }
    let orbits = uf.classes();
    let mut orbit_of = vec![0; placed.elements.len()];
    for (k, orbit) in orbits.iter().enumerate() {
        for &e in orbit {
            orbit_of[e] = k;
        }
    }
    let projections: Vec<Vec<usize>> = (0..configs.len())
        .map(|k| placed.image_of(k).iter().map(|&e| orbit_of[e]).collect())
        .collect();
    let bijective = projections
        .iter()
        .map(|p| {
            let mut seen = vec![false; orbits.len()];
            for &o in p {
                if seen[o] {
                    return false;
                }
                seen[o] = true;
            }
            seen.iter().all(|&s| s)
        })
        .collect();
    Ok(BodyPoints {
        placed,
        orbits,
        projections,
        bijective,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // the smaller index stays root so class order is by lowest member
        if ra < rb {
            self.parent[rb] = ra;
        } else if rb < ra {
            self.parent[ra] = rb;
        }
    }

    fn classes(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.parent.len() {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        by_root.into_values().collect()
    }
}
