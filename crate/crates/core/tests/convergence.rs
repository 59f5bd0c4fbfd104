use std::sync::Arc;

use anelkin::decomposition::{embodiment_of, push_forward, push_forward_with};
use anelkin::lattice::{random_affine, random_body, random_configuration};
use anelkin::{Configuration, LinearMap, SimplicialBody, SpaceDiffeo, TangentRule, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v(x: f64, y: f64) -> Vector {
    Vector::from_slice(&[x, y])
}

fn m(a: f64, b: f64, c: f64, d: f64) -> LinearMap {
    LinearMap::from_rows(&[&[a, b], &[c, d]])
}

fn probes() -> Vec<Vector> {
    (0..5)
        .flat_map(|i| (0..5).map(move |j| v(0.3 * i as f64 - 0.2, 0.3 * j as f64 - 0.2)))
        .collect()
}

fn user_diffeos() -> Vec<SpaceDiffeo> {
    let p = probes();
    vec![
        SpaceDiffeo::user(
            "swirl",
            2,
            |y| v(y[0] + 0.3 * y[1].sin(), y[1] + 0.2 * y[0] * y[0]),
            |y| m(1.0, 0.3 * y[1].cos(), 0.4 * y[0], 1.0),
            &p,
        )
        .unwrap(),
        SpaceDiffeo::user(
            "parabolic shear",
            2,
            |y| v(y[0] + 0.1 * y[1] * y[1], y[1] + 0.1 * y[0].sin()),
            |y| m(1.0, 0.2 * y[1], 0.1 * y[0].cos(), 1.0),
            &p,
        )
        .unwrap(),
        SpaceDiffeo::user(
            "exponential stretch",
            2,
            |y| v((0.3 * y[0]).exp(), y[1] + 0.2 * y[0] * y[1]),
            |y| m(0.3 * (0.3 * y[0]).exp(), 0.0, 0.2 * y[1], 1.0 + 0.2 * y[0]),
            &p,
        )
        .unwrap(),
        SpaceDiffeo::user(
            "wave",
            2,
            |y| v(y[0] + 0.2 * (y[0] + y[1]).cos(), y[1] + 0.2 * (y[0] - y[1]).sin()),
            |y| {
                let (s, d) = (y[0] + y[1], y[0] - y[1]);
                m(1.0 - 0.2 * s.sin(), -0.2 * s.sin(), 0.2 * d.cos(), 1.0 - 0.2 * d.cos())
            },
            &p,
        )
        .unwrap(),
        SpaceDiffeo::user(
            "cubic",
            2,
            |y| v(y[0] + 0.1 * y[0].powi(3), y[1] + 0.1 * y[1].powi(3) + 0.1 * y[0]),
            |y| m(1.0 + 0.3 * y[0] * y[0], 0.0, 0.1, 1.0 + 0.3 * y[1] * y[1]),
            &p,
        )
        .unwrap(),
    ]
}

/// A smooth configuration of the unit square on an `n x n` grid: bent base and a
/// smoothly varying plastic factor.
fn smooth_configuration(n: usize) -> Configuration {
    let body = Arc::new(SimplicialBody::grid_2d(n, n, [0.0, 0.0], [1.0, 1.0]).unwrap());
    let base: Vec<Vector> = body
        .ref_coords()
        .iter()
        .map(|x| v(x[0] + 0.1 * x[1].sin(), x[1] + 0.1 * x[0] * x[0]))
        .collect();
    let holonomic = Configuration::holonomic(body.clone(), base.clone()).unwrap();
    let field = (0..body.num_cells())
        .map(|c| {
            let x = body.barycenter(c, body.ref_coords());
            holonomic.field()[c] * m(1.0 + 0.2 * x[0].sin(), 0.2 * x[1], 0.0, 1.0 + 0.1 * x[1].cos())
        })
        .collect();
    Configuration::new(body, base, field).unwrap()
}

fn deviation(c: &Configuration, g: &SpaceDiffeo, rule: TangentRule) -> f64 {
    let pushed = push_forward_with(c, g, rule).unwrap();
    embodiment_of(&pushed)
        .unwrap()
        .max_deviation(&embodiment_of(c).unwrap())
        .unwrap()
}

#[test]
fn affine_push_forward_preserves_embodiment() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for dim in [2, 3] {
        let body = Arc::new(random_body(&mut rng, dim, 100).unwrap());
        let c = random_configuration(&mut rng, body).unwrap();
        let e = embodiment_of(&c).unwrap();
        for _ in 0..100 {
            let g = SpaceDiffeo::from(random_affine(&mut rng, dim));
            let dev = embodiment_of(&push_forward(&c, &g).unwrap())
                .unwrap()
                .max_deviation(&e)
                .unwrap();
            assert!(dev <= 1e-10, "{dev:e}");
        }
    }
}

#[test]
fn user_push_forward_converges_under_refinement() {
    let configs: Vec<Configuration> = [4, 8, 16, 32].into_iter().map(smooth_configuration).collect();
    for g in user_diffeos() {
        let devs: Vec<f64> = configs
            .iter()
            .map(|c| deviation(c, &g, TangentRule::EdgeMidpoints))
            .collect();
        assert!(devs[0] > 1e-8, "{}: {devs:?}", g.name());
        for w in devs.windows(2) {
            assert!(w[0] / w[1] >= 3.0, "{}: {devs:?}", g.name());
        }
    }
}

#[test]
fn barycenter_rule_is_first_order() {
    let configs: Vec<Configuration> = [4, 8, 16, 32].into_iter().map(smooth_configuration).collect();
    for g in user_diffeos() {
        let devs: Vec<f64> = configs
            .iter()
            .map(|c| deviation(c, &g, TangentRule::Barycenter))
            .collect();
        for w in devs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.6..=2.6).contains(&ratio), "{}: {devs:?}", g.name());
        }
    }
}
