use std::ops::Add;

use num_bigint::{BigInt, Sign};

use crate::configuration::{Configuration, StandaloneField};
use crate::decomposition::embodiment_of;
use crate::geometry::{LinearMap, Vector};
use crate::{Error, Result};

/// Fixed-point scale: every finite `f64` is an integer multiple of `2^-1074`.
const FRACTION_BITS: u64 = 1074;

/// A circuit integral accumulated exactly.
///
/// Each segment contribution is rounded once to `f64` and then added without further
/// rounding, so circulations of loops that share segments add up exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circulation {
    acc: Vec<BigInt>,
}

impl Circulation {
    pub fn zero(dim: usize) -> Self {
        Circulation {
            acc: vec![BigInt::from(0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.acc.len()
    }

    pub fn add_vector(&mut self, v: &Vector) {
        for (a, x) in self.acc.iter_mut().zip(v.as_slice()) {
            *a += to_fixed(*x);
        }
    }

    /// The exact sum rounded to the nearest `f64` per component.
    pub fn value(&self) -> Vector {
        let xs: Vec<f64> = self.acc.iter().map(from_fixed).collect();
        Vector::from_slice(&xs)
    }
}

impl Add for Circulation {
    type Output = Circulation;

    fn add(mut self, rhs: Circulation) -> Circulation {
        for (a, b) in self.acc.iter_mut().zip(rhs.acc) {
            *a += b;
        }
        self
    }
}

fn to_fixed(x: f64) -> BigInt {
    assert!(x.is_finite(), "non-finite circuit contribution");
    if x == 0.0 {
        return BigInt::from(0);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    // x = mantissa * 2^(shift - 1074)
    let (mantissa, shift) = if exp == 0 {
        (frac, 0)
    } else {
        (frac | (1u64 << 52), exp - 1)
    };
    let magnitude = BigInt::from(mantissa) << shift as usize;
    if x < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

fn from_fixed(n: &BigInt) -> f64 {
    let (sign, mag) = n.clone().into_parts();
    if sign == Sign::NoSign {
        return 0.0;
    }
    let bits = mag.bits();
    let value = if bits <= 64 {
        // exact integer conversion rounds once; the power-of-two scaling is exact
        // because results below 2^-1022 carry at most 52 significant bits
        let m = mag.iter_u64_digits().next().unwrap_or(0);
        scale_pow2(m as f64, -(FRACTION_BITS as i64))
    } else {
        // keep 55 bits and fold the rest into a sticky bit
        let shift = bits - 55;
        let top = &mag >> shift as usize;
        let mut m = top.iter_u64_digits().next().unwrap_or(0);
        if mag.trailing_zeros().is_some_and(|tz| tz < shift) {
            m |= 1;
        }
        scale_pow2(m as f64, shift as i64 - FRACTION_BITS as i64)
    };
    if sign == Sign::Minus {
        -value
    } else {
        value
    }
}

fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Discrete line integral of `field - I` along a closed vertex polyline in the
/// reference chart.
///
/// Each segment uses the field of the cell containing its midpoint. A midpoint on a
/// facet is accepted when all candidate cells agree on the segment direction (the
/// lowest-indexed one is used); otherwise the loop must be perturbed.
pub fn burgers_circuit(field: &StandaloneField, loop_vertices: &[usize], tol: f64) -> Result<Circulation> {
    let body = field.body();
    let n = body.num_vertices();
    if loop_vertices.len() < 3 || loop_vertices.first() != loop_vertices.last() {
        return Err(Error::InvalidLoop(
            "loop must be closed and have at least two segments".into(),
        ));
    }
    if let Some(v) = loop_vertices.iter().find(|&&v| v >= n) {
        return Err(Error::InvalidLoop(format!("vertex {v} out of range ({n} vertices)")));
    }
    let refs = body.ref_coords();
    let identity = LinearMap::identity(body.dim());
    let mut total = Circulation::zero(body.dim());
    for (s, pair) in loop_vertices.windows(2).enumerate() {
        let (a, b) = (refs[pair[0]], refs[pair[1]]);
        let dx = b - a;
        if dx.norm() == 0.0 {
            return Err(Error::InvalidLoop(format!("segment {s} has zero length")));
        }
        let mid = (a + b).scale(0.5);
        let candidates = body.locate(&mid, tol);
        let Some(&first) = candidates.first() else {
            return Err(Error::SegmentOutsideBody { segment: s });
        };
        let f = &field.field()[first];
        let along = f.apply(&dx);
        for &other in &candidates[1..] {
            let g = &field.field()[other];
            let reference = dx.norm() * f.frobenius_norm().max(g.frobenius_norm()).max(1.0);
            if (along - g.apply(&dx)).norm() > tol * reference {
                return Err(Error::SegmentOnFacet { segment: s });
            }
        }
        total.add_vector(&(*f - identity).apply(&dx));
    }
    Ok(total)
}

/// Circuit of a configuration's plastic factor `(T base)^-1 field`.
pub fn burgers_of_configuration(c: &Configuration, loop_vertices: &[usize], tol: f64) -> Result<Circulation> {
    let embodiment = embodiment_of(c)?;
    let field = StandaloneField::new(c.body().clone(), embodiment.field().to_vec())?;
    burgers_circuit(&field, loop_vertices, tol)
}
