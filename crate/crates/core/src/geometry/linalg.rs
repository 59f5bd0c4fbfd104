//! Small dense vectors and matrices of runtime dimension 2 or 3.
//!
//! Storage is inline (`[f64; 3]` / `[[f64; 3]; 3]`) so cell fields stay cheap to copy.
//! Unused slots are kept at zero.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::Error;

pub const MAX_DIM: usize = 3;

/// A point or vector in the flat space chart.
#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    dim: usize,
    data: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        Vector {
            dim,
            data: [0.0; MAX_DIM],
        }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut v = Vector::zeros(xs.len());
        v.data[..xs.len()].copy_from_slice(xs);
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.dim]
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        let mut out = *self;
        for x in &mut out.data[..self.dim] {
            *x *= s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_slice())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        let dim = self.dim;
        &mut self.data[..dim][i]
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for i in 0..self.dim {
            out.data[i] += rhs.data[i];
        }
        out
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for i in 0..self.dim {
            out.data[i] -= rhs.data[i];
        }
        out
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        let mut out = self;
        for x in &mut out.data[..self.dim] {
            *x = -*x;
        }
        out
    }
}

/// A linear map of the chart, stored as a square matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct LinearMap {
    dim: usize,
    m: [[f64; MAX_DIM]; MAX_DIM],
}

impl LinearMap {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        LinearMap {
            dim,
            m: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        let mut a = Self::zeros(dim);
        for i in 0..dim {
            a.m[i][i] = s;
        }
        a
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a perfect square.
    pub fn from_row_major(entries: &[f64]) -> Result<Self, Error> {
        let dim = match entries.len() {
            1 => 1,
            4 => 2,
            9 => 3,
            n => {
                return Err(Error::Dimension(format!(
                    "{n} matrix entries do not form a 1x1, 2x2 or 3x3 matrix"
                )))
            }
        };
        let mut a = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                a.m[i][j] = entries[i * dim + j];
            }
        }
        Ok(a)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut a = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "matrix must be square");
            a.m[i][..dim].copy_from_slice(row);
        }
        a
    }

    pub fn from_columns(cols: &[Vector]) -> Self {
        let dim = cols.len();
        let mut a = Self::zeros(dim);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.dim(), dim, "matrix must be square");
            for i in 0..dim {
                a.m[i][j] = c[i];
            }
        }
        a
    }

    pub fn rotation_2d(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_rows(&[&[c, -s], &[s, c]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim);
        self.m[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.dim && j < self.dim);
        self.m[i][j] = value;
    }

    pub fn column(&self, j: usize) -> Vector {
        let mut v = Vector::zeros(self.dim);
        for i in 0..self.dim {
            v[i] = self.m[i][j];
        }
        v
    }

    pub fn row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            out.extend_from_slice(&self.m[i][..self.dim]);
        }
        out
    }

    pub fn transpose(&self) -> LinearMap {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.m[j][i] = self.m[i][j];
            }
        }
        t
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        debug_assert_eq!(self.dim, v.dim());
        let mut out = Vector::zeros(self.dim);
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..self.dim {
                acc += self.m[i][j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.row_major().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Max absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.m[i][j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.row_major().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.m[i][i]).sum()
    }

    /// Determinant by LU factorization with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let mut a = self.m;
        let n = self.dim;
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n).max_by(|&r, &s| a[r][k].abs().total_cmp(&a[s][k].abs())).unwrap();
            if a[p][k] == 0.0 {
                return 0.0;
            }
            if p != k {
                a.swap(p, k);
                det = -det;
            }
            det *= a[k][k];
            for r in k + 1..n {
                let f = a[r][k] / a[k][k];
                for c in k + 1..n {
                    a[r][c] -= f * a[k][c];
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// Returns `None` when a pivot vanishes exactly; near-singular input is the
    /// caller's concern (see [`LinearMap::condition_number`]).
    pub fn inverse(&self) -> Option<LinearMap> {
        let n = self.dim;
        let mut a = self.m;
        let mut inv = Self::identity(n).m;
        for k in 0..n {
            let p = (k..n).max_by(|&r, &s| a[r][k].abs().total_cmp(&a[s][k].abs())).unwrap();
            if a[p][k] == 0.0 || !a[p][k].is_finite() {
                return None;
            }
            a.swap(p, k);
            inv.swap(p, k);
            let piv = a[k][k];
            for c in 0..n {
                a[k][c] /= piv;
                inv[k][c] /= piv;
            }
            for r in 0..n {
                if r != k {
                    let f = a[r][k];
                    if f != 0.0 {
                        for c in 0..n {
                            a[r][c] -= f * a[k][c];
                            inv[r][c] -= f * inv[k][c];
                        }
                    }
                }
            }
        }
        Some(LinearMap { dim: n, m: inv })
    }

    /// 1-norm condition number; infinite for singular matrices.
    pub fn condition_number(&self) -> f64 {
        match self.inverse() {
            Some(inv) => self.norm_1() * inv.norm_1(),
            None => f64::INFINITY,
        }
    }

    /// Largest entrywise difference relative to `max(1, max|other|)`.
    pub fn relative_deviation(&self, other: &LinearMap) -> f64 {
        let diff = (*self - *other).max_abs();
        diff / other.max_abs().max(1.0)
    }
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.dim).map(|i| &self.m[i][..self.dim]).collect();
        write!(f, "{rows:?}")
    }
}

impl Mul for LinearMap {
    type Output = LinearMap;
    fn mul(self, rhs: LinearMap) -> LinearMap {
        debug_assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = LinearMap::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.m[i][k] * rhs.m[k][j];
                }
                out.m[i][j] = acc;
            }
        }
        out
    }
}

impl Mul<Vector> for LinearMap {
    type Output = Vector;
    fn mul(self, rhs: Vector) -> Vector {
        self.apply(&rhs)
    }
}

impl Add for LinearMap {
    type Output = LinearMap;
    fn add(self, rhs: LinearMap) -> LinearMap {
        let mut out = self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.m[i][j] += rhs.m[i][j];
            }
        }
        out
    }
}

impl Sub for LinearMap {
    type Output = LinearMap;
    fn sub(self, rhs: LinearMap) -> LinearMap {
        let mut out = self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.m[i][j] -= rhs.m[i][j];
            }
        }
        out
    }
}
