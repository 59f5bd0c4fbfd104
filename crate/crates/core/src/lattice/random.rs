use std::sync::Arc;

use rand::Rng;

use crate::configuration::Configuration;
use crate::geometry::{AffineMap, LinearMap, SimplicialBody, Vector};
use crate::Result;

/// Grid shape giving roughly `target` cells (at least one square or cube).
fn grid_shape(dim: usize, target: usize) -> Vec<usize> {
    if dim == 2 {
        let squares = (target / 2).max(1);
        let nx = (squares as f64).sqrt().floor().max(1.0) as usize;
        vec![nx, (squares / nx).max(1)]
    } else {
        let cubes = (target / 6).max(1);
        let n = (cubes as f64).cbrt().floor().max(1.0) as usize;
        let ny = ((cubes / n) as f64).sqrt().floor().max(1.0) as usize;
        vec![n, ny, (cubes / (n * ny)).max(1)]
    }
}

/// A jittered grid of about `target_cells` cells spanning the unit box.
pub fn random_body<R: Rng + ?Sized>(rng: &mut R, dim: usize, target_cells: usize) -> Result<SimplicialBody> {
    let shape = grid_shape(dim, target_cells);
    let grid = if dim == 2 {
        SimplicialBody::grid_2d(shape[0], shape[1], [0.0, 0.0], [1.0, 1.0])?
    } else {
        SimplicialBody::grid_3d([shape[0], shape[1], shape[2]], [0.0; 3], [1.0; 3])?
    };
    let h = 1.0 / *shape.iter().max().expect("nonempty") as f64;
    let amplitude = if dim == 2 { 0.15 * h } else { 0.08 * h };
    loop {
        let coords: Vec<Vector> = grid
            .ref_coords()
            .iter()
            .map(|p| {
                let mut q = *p;
                for k in 0..dim {
                    q[k] += rng.gen_range(-amplitude..amplitude);
                }
                q
            })
            .collect();
        if let Ok(body) = SimplicialBody::new(dim, coords, grid.cells().to_vec()) {
            return Ok(body);
        }
    }
}

/// A linear map with singular values in `[lo, hi]` and positive determinant.
pub fn random_linear<R: Rng + ?Sized>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> LinearMap {
    loop {
        let mut m = LinearMap::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let det = m.determinant();
        if det.abs() < 0.05 {
            continue;
        }
        if det < 0.0 {
            for j in 0..dim {
                m.set(0, j, -m.get(0, j));
            }
        }
        let svd = nalgebra::DMatrix::from_fn(dim, dim, |i, j| m.get(i, j)).svd(false, false);
        let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
        if smax / smin > hi / lo {
            continue;
        }
        let s = rng.gen_range(lo / smin..=hi / smax);
        return LinearMap::scaled_identity(dim, s) * m;
    }
}

/// Random orientation-preserving affine map with moderate conditioning.
pub fn random_affine<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> AffineMap {
    let linear = random_linear(rng, dim, 0.5, 2.0);
    let offset: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
    AffineMap::new(linear, Vector::from_slice(&offset)).expect("positive determinant")
}

/// A random smooth base map of `body` (affine plus a mild bend).
pub fn random_base<R: Rng + ?Sized>(rng: &mut R, body: &SimplicialBody) -> Vec<Vector> {
    let dim = body.dim();
    let affine = random_affine(rng, dim);
    let mut amplitude = 0.1;
    let freq: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..2.0)).collect();
    loop {
        let base: Vec<Vector> = body
            .ref_coords()
            .iter()
            .map(|x| {
                let mut bent = *x;
                for k in 0..dim {
                    let next = x[(k + 1) % dim];
                    bent[k] += amplitude * (freq[k] * next).sin();
                }
                affine.apply(&bent)
            })
            .collect();
        let oriented = (0..body.num_cells()).all(|c| body.edge_matrix(c, &base).is_ok_and(|e| e.determinant() > 0.0));
        if oriented {
            return base;
        }
        amplitude *= 0.5;
    }
}

/// Per-cell plastic factors `I + M` with `|M_ij| <= spread`, kept orientation-preserving.
pub fn random_plastic_field<R: Rng + ?Sized>(rng: &mut R, dim: usize, cells: usize, spread: f64) -> Vec<LinearMap> {
    (0..cells)
        .map(|_| loop {
            let mut m = LinearMap::identity(dim);
            for i in 0..dim {
                for j in 0..dim {
                    m.set(i, j, m.get(i, j) + rng.gen_range(-spread..spread));
                }
            }
            if m.determinant() > 0.2 {
                break m;
            }
        })
        .collect()
}

/// A configuration with random base and random plastic factor: `field = T(base) * P`.
pub fn random_configuration<R: Rng + ?Sized>(rng: &mut R, body: Arc<SimplicialBody>) -> Result<Configuration> {
    let base = random_base(rng, &body);
    let plastic = random_plastic_field(rng, body.dim(), body.num_cells(), 0.3);
    let holonomic = Configuration::holonomic(body.clone(), base.clone())?;
    let field = holonomic.field().iter().zip(&plastic).map(|(t, p)| *t * *p).collect();
    Configuration::new(body, base, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cell_counts_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (dim, target) in [(2, 10), (2, 500), (3, 12), (3, 500)] {
            let b = random_body(&mut rng, dim, target).unwrap();
            assert!(
                b.num_cells() >= 2 && b.num_cells() <= target,
                "{dim} {target} {}",
                b.num_cells()
            );
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let make = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let b = Arc::new(random_body(&mut rng, 2, 40).unwrap());
            random_configuration(&mut rng, b).unwrap().field().to_vec()
        };
        assert_eq!(make(), make());
    }

    #[test]
    fn linear_maps_are_conditioned() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let m = random_linear(&mut rng, 3, 0.5, 2.0);
            assert!(m.determinant() > 0.0);
            let svd = nalgebra::DMatrix::from_fn(3, 3, |i, j| m.get(i, j)).svd(false, false);
            assert!(svd.singular_values.min() >= 0.5 - 1e-12 && svd.singular_values.max() <= 2.0 + 1e-12);
        }
    }
}
