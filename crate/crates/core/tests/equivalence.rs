use std::sync::Arc;

use anelkin::decomposition::push_forward;
use anelkin::equivalence::{are_compatible, assign_references, partition_into_embodiments, ReferenceChooser};
use anelkin::lattice::{random_affine, random_body, random_configuration};
use anelkin::{Configuration, LinearMap, SpaceDiffeo};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

/// Three seed embodiments, each displaced by four random affine maps. Returns the
/// configurations and the seed each one came from.
fn family(seed: u64) -> (Vec<Configuration>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 2 + (seed % 2) as usize;
    let body = Arc::new(random_body(&mut rng, dim, 60).unwrap());
    let mut configs = Vec::new();
    let mut origin = Vec::new();
    for s in 0..3 {
        let c = random_configuration(&mut rng, body.clone()).unwrap();
        for _ in 0..4 {
            let g = SpaceDiffeo::from(random_affine(&mut rng, dim));
            configs.push(push_forward(&c, &g).unwrap());
            origin.push(s);
        }
    }
    (configs, origin)
}

fn classes_as_sets(configs: &[Configuration], order: &[usize]) -> Vec<Vec<usize>> {
    let shuffled: Vec<Configuration> = order.iter().map(|&i| configs[i].clone()).collect();
    let mut out: Vec<Vec<usize>> = partition_into_embodiments(&shuffled, TOL)
        .unwrap()
        .into_iter()
        .map(|c| {
            let mut m: Vec<usize> = c.members.iter().map(|&k| order[k]).collect();
            m.sort();
            m
        })
        .collect();
    out.sort();
    out
}

#[test]
fn partition_recovers_seed_embodiments() {
    for seed in 0..20 {
        let (configs, origin) = family(seed);
        let classes = partition_into_embodiments(&configs, TOL).unwrap();
        assert_eq!(classes.len(), 3, "seed {seed}");
        for class in &classes {
            let s = origin[class.representative];
            assert!(
                class.members.iter().all(|&m| origin[m] == s),
                "false merge, seed {seed}"
            );
            assert_eq!(class.members.len(), 4, "false split, seed {seed}");
        }
    }
}

#[test]
fn partition_is_order_independent() {
    let (configs, _) = family(101);
    let identity: Vec<usize> = (0..configs.len()).collect();
    let expected = classes_as_sets(&configs, &identity);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let mut order = identity.clone();
        order.shuffle(&mut rng);
        assert_eq!(classes_as_sets(&configs, &order), expected);
    }
}

#[test]
fn compatibility_is_an_equivalence_relation() {
    let (configs, origin) = family(3);
    let n = configs.len();
    let rel: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| are_compatible(&configs[i], &configs[j], TOL).unwrap())
                .collect()
        })
        .collect();
    for i in 0..n {
        assert!(rel[i][i]);
        for j in 0..n {
            assert_eq!(rel[i][j], rel[j][i]);
            assert_eq!(rel[i][j], origin[i] == origin[j]);
            for k in 0..n {
                assert!(!(rel[i][j] && rel[j][k]) || rel[i][k]);
            }
        }
    }
}

#[test]
fn single_cell_perturbation_is_split_off() {
    let (mut configs, _) = family(8);
    let victim = configs[5].clone();
    let mut field = victim.field().to_vec();
    field[0] = field[0] * LinearMap::from_rows(&[&[1.0 + 1e-6, 0.0], &[0.0, 1.0]]);
    configs.push(Configuration::new(victim.body().clone(), victim.base().to_vec(), field).unwrap());
    let classes = partition_into_embodiments(&configs, TOL).unwrap();
    assert_eq!(classes.len(), 4);
    assert_eq!(classes.last().unwrap().members, vec![12]);
}

#[test]
fn found_displacements_push_reference_onto_member() {
    for seed in 0..20 {
        let (configs, _) = family(seed);
        let classes = partition_into_embodiments(&configs, TOL).unwrap();
        let refs = assign_references(&configs, &classes, &ReferenceChooser::LowestIndex, TOL).unwrap();
        for member in 0..configs.len() {
            let fit = refs
                .deformation_to_reference(&configs, member, TOL)
                .unwrap()
                .expect("affinely related by construction");
            let reference = &configs[refs.reference_for(member).unwrap()];
            let pushed = push_forward(reference, &SpaceDiffeo::from(fit.map)).unwrap();
            let target = &configs[member];
            let scale = target.base().iter().map(|p| p.norm()).fold(1.0, f64::max);
            for (p, q) in pushed.base().iter().zip(target.base()) {
                assert!((*p - *q).norm() <= 1e-9 * scale, "seed {seed} member {member}");
            }
            for (f, t) in pushed.field().iter().zip(target.field()) {
                assert!(f.relative_deviation(t) <= 1e-9);
            }
        }
    }
}
