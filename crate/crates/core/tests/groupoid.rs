use std::sync::Arc;

use anelkin::decomposition::push_forward;
use anelkin::equivalence::{partition_into_embodiments, GroupSpec, PointConfigurationSet};
use anelkin::groupoid::{body_points, configuration_groupoid, FiniteGroupoid};
use anelkin::lattice::{random_affine, random_body, random_configuration};
use anelkin::{Configuration, SpaceDiffeo, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
enum Mutation {
    ChangeComposite,
    DeleteComposite,
    StrayComposite,
    DeleteInverse,
    ChangeInverse,
    ChangeIdentity,
    ChangeSource,
    ChangeTarget,
}

const MUTATIONS: [Mutation; 8] = [
    Mutation::ChangeComposite,
    Mutation::DeleteComposite,
    Mutation::StrayComposite,
    Mutation::DeleteInverse,
    Mutation::ChangeInverse,
    Mutation::ChangeIdentity,
    Mutation::ChangeSource,
    Mutation::ChangeTarget,
];

/// Applies one single-entry mutation and returns the indices a correct report must name.
fn mutate(g: &mut FiniteGroupoid, kind: Mutation, rng: &mut impl Rng) -> Vec<usize> {
    let n = g.num_morphisms();
    let objects = g.num_objects;
    let other_than = |rng: &mut dyn rand::RngCore, x: usize, range: usize| loop {
        let y = rng.gen_range(0..range);
        if y != x {
            break y;
        }
    };
    match kind {
        Mutation::ChangeComposite | Mutation::DeleteComposite => {
            let mut keys: Vec<(usize, usize)> = g.compose.keys().copied().collect();
            keys.sort();
            let key = keys[rng.gen_range(0..keys.len())];
            if matches!(kind, Mutation::DeleteComposite) {
                g.compose.remove(&key);
            } else {
                let old = g.compose[&key];
                g.compose.insert(key, other_than(rng, old, n));
            }
            vec![key.0, key.1]
        }
        Mutation::StrayComposite => loop {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if !g.is_composable(a, b) {
                g.compose.insert((a, b), rng.gen_range(0..n));
                break vec![a, b];
            }
        },
        Mutation::DeleteInverse | Mutation::ChangeInverse => {
            let m = rng.gen_range(0..n);
            g.inverse[m] = match kind {
                Mutation::DeleteInverse => None,
                _ => Some(other_than(rng, g.inverse[m].unwrap(), n)),
            };
            vec![m]
        }
        Mutation::ChangeIdentity => {
            let o = rng.gen_range(0..objects);
            g.identity[o] = other_than(rng, g.identity[o], n);
            vec![o]
        }
        Mutation::ChangeSource | Mutation::ChangeTarget => {
            let m = rng.gen_range(0..n);
            if matches!(kind, Mutation::ChangeSource) {
                g.source[m] = other_than(rng, g.source[m], objects);
            } else {
                g.target[m] = other_than(rng, g.target[m], objects);
            }
            vec![m]
        }
    }
}

fn sample_groupoid(rng: &mut impl Rng) -> FiniteGroupoid {
    if rng.gen_bool(0.5) {
        FiniteGroupoid::pair(rng.gen_range(2..=6))
    } else {
        // two orbits of point configurations related by affine maps
        let base: Vec<Vector> = (0..5)
            .map(|_| Vector::from_slice(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
            .collect();
        let other: Vec<Vector> = base
            .iter()
            .map(|p| Vector::from_slice(&[p[0], p[1] * p[1] + p[0]]))
            .collect();
        let mut configs = Vec::new();
        for seed in [&base, &other] {
            for _ in 0..rng.gen_range(1..=3) {
                let a = random_affine(rng, 2);
                configs.push(seed.iter().map(|p| a.apply(p)).collect());
            }
        }
        let pcs = PointConfigurationSet::unlabeled(configs, GroupSpec::Affine).unwrap();
        configuration_groupoid(&pcs).unwrap().groupoid
    }
}

#[test]
fn constructed_groupoids_pass_and_mutations_are_pinpointed() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let mut g = sample_groupoid(&mut rng);
        assert!(g.verify_axioms().all_passed(), "trial {trial}");
        let kind = MUTATIONS[trial % MUTATIONS.len()];
        let named = mutate(&mut g, kind, &mut rng);
        let report = g.verify_axioms();
        let (axiom, check) = report
            .checks()
            .into_iter()
            .find(|(_, c)| !c.passed)
            .unwrap_or_else(|| panic!("trial {trial}: {kind:?} went undetected"));
        let witness = check.counterexample.clone().unwrap_or_default();
        assert!(
            named.iter().any(|x| witness.contains(x)),
            "trial {trial}: {kind:?} on {named:?} reported by {axiom} as {witness:?}"
        );
    }
}

fn affine_class(rng: &mut impl Rng, points: &[Vector], size: usize) -> Vec<Vec<Vector>> {
    let mut class = vec![points.to_vec()];
    for _ in 1..size {
        let a = random_affine(rng, points[0].dim());
        class.push(points.iter().map(|p| a.apply(p)).collect());
    }
    class
}

#[test]
fn body_points_match_image_cardinality() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..40 {
        let n = rng.gen_range(5..=50);
        let dim = rng.gen_range(2..=3);
        let mut points: Vec<Vector> = (0..n)
            .map(|_| Vector::from_slice(&(0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<_>>()))
            .collect();
        // every other trial collapses a few protobody points onto others
        let collapsed = if trial % 2 == 1 {
            let k = rng.gen_range(1..=n / 3);
            for i in 0..k {
                points[n - 1 - i] = points[i];
            }
            k
        } else {
            0
        };
        let image = n - collapsed;
        let size = rng.gen_range(2..=5);
        let class = affine_class(&mut rng, &points, size);
        let pcs = PointConfigurationSet::unlabeled(class.clone(), GroupSpec::Affine).unwrap();
        let cg = configuration_groupoid(&pcs).unwrap();
        assert_eq!(cg.groupoid.orbits().unwrap().len(), 1);
        let bp = body_points(&class, &cg.found_witnesses()).unwrap();
        assert_eq!(bp.len(), image, "trial {trial}");
        for k in 0..class.len() {
            assert_eq!(bp.placed.image_of(k).len(), image);
            assert!(bp.bijective[k]);
        }
        assert!(bp.orbits.iter().all(|o| o.len() == class.len()));
        if collapsed > 0 {
            assert!(bp.len() < n);
        }
    }
}

/// Base vertices plus the tips of each cell's fiber vectors, as a finite point set.
fn point_image(c: &Configuration) -> Vec<Vector> {
    let body = c.body();
    let mut out = c.base().to_vec();
    for (cell, f) in c.field().iter().enumerate() {
        let vs = body.cell(cell);
        let mut centre = Vector::zeros(body.dim());
        for &v in vs {
            centre = centre + c.base()[v];
        }
        let centre = centre.scale(1.0 / vs.len() as f64);
        for i in 0..body.dim() {
            let mut e = Vector::zeros(body.dim());
            e[i] = 1.0;
            out.push(centre + f.apply(&e));
        }
    }
    out
}

#[test]
fn groupoid_orbits_agree_with_embodiment_partition() {
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 2 + (seed as usize % 2);
        let body = Arc::new(random_body(&mut rng, dim, 24).unwrap());
        let mut configs = Vec::new();
        for _ in 0..3 {
            let c = random_configuration(&mut rng, body.clone()).unwrap();
            for _ in 0..rng.gen_range(1..=3) {
                configs.push(push_forward(&c, &SpaceDiffeo::from(random_affine(&mut rng, dim))).unwrap());
            }
        }
        let classes: Vec<Vec<usize>> = partition_into_embodiments(&configs, 1e-9)
            .unwrap()
            .into_iter()
            .map(|c| c.members)
            .collect();
        let pcs =
            PointConfigurationSet::unlabeled(configs.iter().map(point_image).collect(), GroupSpec::Affine).unwrap();
        let orbits = configuration_groupoid(&pcs).unwrap().groupoid.orbits().unwrap();
        assert_eq!(orbits, classes, "seed {seed}");
    }
}
