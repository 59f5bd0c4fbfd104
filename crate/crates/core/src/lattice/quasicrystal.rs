use std::cmp::Ordering;

use crate::geometry::{Vector, MAX_DIM};
use crate::{Error, Result};

/// Gram-Schmidt residuals below this norm mark a dependent frame.
const INDEPENDENCE_TOLERANCE: f64 = 1e-10;

/// Orthonormal coordinates on the physical subspace `E∥ ⊂ R^2n` and its orthogonal
/// complement `E⊥`.
///
/// The `E∥` basis is the Gram-Schmidt orthonormalization of the given frame, in order.
/// The `E⊥` basis completes it with the standard basis vectors that leave the largest
/// residuals, oriented so that the full basis is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionFrame {
    parallel: Vec<Vec<f64>>,
    perp: Vec<Vec<f64>>,
}

impl ProjectionFrame {
    pub fn new(frame: &[Vec<f64>]) -> Result<Self> {
        let n = frame.len();
        if n == 0 || n > MAX_DIM || frame.iter().any(|v| v.len() != 2 * n) {
            return Err(Error::DegenerateFrame);
        }
        if frame.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateFrame);
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(2 * n);
        for v in frame {
            let r = residual(&basis, v);
            let norm = dot(&r, &r).sqrt();
            if norm <= INDEPENDENCE_TOLERANCE * dot(v, v).sqrt().max(f64::MIN_POSITIVE) {
                return Err(Error::DegenerateFrame);
            }
            basis.push(r.iter().map(|x| x / norm).collect());
        }
        while basis.len() < 2 * n {
            let best = (0..2 * n)
                .map(|k| {
                    let mut e = vec![0.0; 2 * n];
                    e[k] = 1.0;
                    residual(&basis, &e)
                })
                .max_by(|a, b| dot(a, a).total_cmp(&dot(b, b)))
                .expect("nonempty");
            let norm = dot(&best, &best).sqrt();
            basis.push(best.iter().map(|x| x / norm).collect());
        }
        if determinant(&basis) < 0.0 {
            for x in basis.last_mut().expect("nonempty") {
                *x = -*x;
            }
        }
        let perp = basis.split_off(n);
        Ok(ProjectionFrame { parallel: basis, perp })
    }

    /// Physical dimension `n`.
    pub fn dim(&self) -> usize {
        self.parallel.len()
    }

    pub fn parallel_basis(&self) -> &[Vec<f64>] {
        &self.parallel
    }

    pub fn perp_basis(&self) -> &[Vec<f64>] {
        &self.perp
    }

    pub fn parallel_coords(&self, z: &[f64]) -> Vec<f64> {
        self.parallel.iter().map(|e| dot(e, z)).collect()
    }

    pub fn perp_coords(&self, z: &[f64]) -> Vec<f64> {
        self.perp.iter().map(|e| dot(e, z)).collect()
    }

    /// The shadow of the unit hypercube on `E⊥`, as a box. For `n = 1` this is the
    /// canonical window.
    pub fn canonical_window(&self) -> Window {
        let (lo, hi) = self
            .perp
            .iter()
            .map(|e| {
                let lo = e.iter().filter(|x| **x < 0.0).sum::<f64>();
                let hi = e.iter().filter(|x| **x > 0.0).sum::<f64>();
                (lo, hi)
            })
            .unzip();
        Window::Box { lo, hi }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `v` minus its projection onto the orthonormal vectors in `basis` (twice, for stability).
fn residual(basis: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for e in basis {
            let c = dot(e, &r);
            for (x, y) in r.iter_mut().zip(e) {
                *x -= c * y;
            }
        }
    }
    r
}

/// Determinant of the matrix whose rows are `rows`, by partial-pivot elimination.
fn determinant(rows: &[Vec<f64>]) -> f64 {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let n = m.len();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs()))
            .expect("nonempty");
        if m[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

const BOUNDARY_SLACK: f64 = 1e-10;

/// Acceptance region in `E⊥` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    /// Half-open box `lo <= q < hi`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Open ball `|q - center| < radius`.
    Ball { center: Vec<f64>, radius: f64 },
}

impl Window {
    fn validate(&self, n: usize) -> Result<()> {
        let ok = match self {
            Window::Box { lo, hi } => lo.len() == n && hi.len() == n && lo.iter().chain(hi).all(|x| x.is_finite()),
            Window::Ball { center, radius } => {
                center.len() == n && center.iter().all(|x| x.is_finite()) && radius.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::WindowUnbounded)
        }
    }

    /// Membership with boundaries snapped: points within `BOUNDARY_SLACK` (relative to
    /// the window size) of a face count as lying on it, so lattice points that sit
    /// exactly on the boundary are classified consistently despite rounding.
    pub fn contains(&self, q: &[f64]) -> bool {
        match self {
            Window::Box { lo, hi } => q.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| {
                let eps = BOUNDARY_SLACK * (h - l).abs().max(l.abs()).max(h.abs());
                l - eps <= *x && *x < h - eps
            }),
            Window::Ball { center, radius } => {
                let d2: f64 = q.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
                d2.sqrt() < radius - BOUNDARY_SLACK * radius.abs()
            }
        }
    }

    /// Axis-aligned bounds `(lo, hi)`; empty windows give `lo > hi` somewhere.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Window::Box { lo, hi } => (lo.clone(), hi.clone()),
            Window::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// The window scaled about its center.
    pub fn scaled(&self, factor: f64) -> Window {
        match self {
            Window::Box { lo, hi } => {
                let (lo, hi) = lo
                    .iter()
                    .zip(hi)
                    .map(|(l, h)| {
                        let (c, r) = (0.5 * (l + h), 0.5 * (h - l) * factor);
                        (c - r, c + r)
                    })
                    .unzip();
                Window::Box { lo, hi }
            }
            Window::Ball { center, radius } => Window::Ball {
                center: center.clone(),
                radius: radius * factor,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutProjectSpec {
    /// `n` vectors spanning `E∥` in `R^2n`.
    pub frame: Vec<Vec<f64>>,
    pub window: Window,
    /// Half-open box `lo <= p < hi` in `E∥` coordinates.
    pub extent_lo: Vec<f64>,
    pub extent_hi: Vec<f64>,
    /// Keep at most this many points (the lexicographically first).
    pub max_points: usize,
}

impl CutProjectSpec {
    /// Chain of slope `slope` with the canonical window, covering `[0, length)`.
    pub fn chain(slope: f64, length: f64, max_points: usize) -> Result<Self> {
        let frame = vec![vec![1.0, slope]];
        let window = ProjectionFrame::new(&frame)?.canonical_window();
        Ok(CutProjectSpec {
            frame,
            window,
            extent_lo: vec![0.0],
            extent_hi: vec![length],
            max_points,
        })
    }

    /// The Fibonacci chain with exactly `points` points.
    pub fn fibonacci(points: usize) -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        // mean spacing is below 0.75
        Self::chain(1.0 / phi, 0.75 * points as f64 + 10.0, points).expect("independent frame")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasicrystalPoints {
    /// Projected points, sorted lexicographically.
    pub points: Vec<Vector>,
    /// The lattice point behind each projected point.
    pub lattice: Vec<Vec<i64>>,
}

impl QuasicrystalPoints {
    /// Consecutive distances of a one-dimensional chain.
    pub fn spacings(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).collect()
    }
}

/// Enumerates the lattice points of `Z^2n` whose `E⊥` projection lies in the window and
/// whose `E∥` projection lies in the extent box.
pub fn cut_and_project(spec: &CutProjectSpec) -> Result<QuasicrystalPoints> {
    let frame = ProjectionFrame::new(&spec.frame)?;
    let n = frame.dim();
    spec.window.validate(n)?;
    if spec.extent_lo.len() != n
        || spec.extent_hi.len() != n
        || !spec.extent_lo.iter().chain(&spec.extent_hi).all(|x| x.is_finite())
    {
        return Err(Error::WindowUnbounded);
    }
    let (wlo, whi) = spec.window.bounds();
    if wlo.iter().zip(&whi).any(|(l, h)| l > h) || spec.extent_lo.iter().zip(&spec.extent_hi).any(|(l, h)| l > h) {
        return Ok(QuasicrystalPoints {
            points: Vec::new(),
            lattice: Vec::new(),
        });
    }
    // z = Σ p_k e∥_k + Σ q_k e⊥_k, so each coordinate of z is bounded by interval arithmetic
    let range = |i: usize| -> (i64, i64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        let terms = frame
            .parallel
            .iter()
            .zip(spec.extent_lo.iter().zip(&spec.extent_hi))
            .chain(frame.perp.iter().zip(wlo.iter().zip(&whi)));
        for (e, (a, b)) in terms {
            let (x, y) = (e[i] * a, e[i] * b);
            lo += x.min(y);
            hi += x.max(y);
        }
        ((lo.floor() as i64) - 1, (hi.ceil() as i64) + 1)
    };
    let ranges: Vec<(i64, i64)> = (0..2 * n).map(range).collect();

    let accept = |z: &[i64]| -> Option<(Vector, Vec<i64>)> {
        let zf: Vec<f64> = z.iter().map(|&x| x as f64).collect();
        if !spec.window.contains(&frame.perp_coords(&zf)) {
            return None;
        }
        let p = frame.parallel_coords(&zf);
        let inside = p
            .iter()
            .zip(spec.extent_lo.iter().zip(&spec.extent_hi))
            .all(|(x, (l, h))| l <= x && x < h);
        inside.then(|| (Vector::from_slice(&p), z.to_vec()))
    };

    // split the outermost coordinate among workers, then merge in a fixed order
    let (first_lo, first_hi) = ranges[0];
    let span = (first_hi - first_lo + 1) as usize;
    let workers = std::thread::available_parallelism()
        .map_or(1, |p| p.get())
        .min(span)
        .max(1);
    let chunk = span.div_ceil(workers) as i64;
    let mut found: Vec<(Vector, Vec<i64>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers as i64)
            .map(|w| {
                let ranges = &ranges;
                let accept = &accept;
                scope.spawn(move || {
                    let mut out = Vec::new();
                    let start = first_lo + w * chunk;
                    let end = (start + chunk - 1).min(first_hi);
                    let mut z: Vec<i64> = ranges.iter().map(|r| r.0).collect();
                    for z0 in start..=end {
                        z[0] = z0;
                        enumerate_tail(&mut z, 1, ranges, &mut |z| {
                            if let Some(hit) = accept(z) {
                                out.push(hit);
                            }
                        });
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("enumeration worker panicked"))
            .collect()
    });
    found.sort_by(|a, b| lex(&a.0, &b.0).then_with(|| a.1.cmp(&b.1)));
    found.truncate(spec.max_points);
    let (points, lattice) = found.into_iter().unzip();
    Ok(QuasicrystalPoints { points, lattice })
}

fn enumerate_tail(z: &mut Vec<i64>, k: usize, ranges: &[(i64, i64)], visit: &mut dyn FnMut(&[i64])) {
    if k == z.len() {
        visit(z);
        return;
    }
    for x in ranges[k].0..=ranges[k].1 {
        z[k] = x;
        enumerate_tail(z, k + 1, ranges, visit);
    }
}

fn lex(a: &Vector, b: &Vector) -> Ordering {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BurgersSplit {
    /// Coordinates in the orthonormal `E∥` basis.
    pub parallel: Vec<f64>,
    /// Coordinates in the orthonormal `E⊥` basis.
    pub perp: Vec<f64>,
}

impl BurgersSplit {
    /// `embed(parallel) + embed(perp)` in `R^2n`.
    pub fn reconstruct(&self, frame: &ProjectionFrame) -> Vec<f64> {
        let mut out = vec![0.0; 2 * frame.dim()];
        for (c, e) in self
            .parallel
            .iter()
            .zip(frame.parallel_basis())
            .chain(self.perp.iter().zip(frame.perp_basis()))
        {
            for (o, x) in out.iter_mut().zip(e) {
                *o += c * x;
            }
        }
        out
    }
}

/// Orthogonal splitting of a lattice Burgers vector into its physical and complementary
/// components.
pub fn split_burgers(b_hat: &[f64], frame: &[Vec<f64>]) -> Result<BurgersSplit> {
    let pf = ProjectionFrame::new(frame)?;
    if b_hat.len() != 2 * pf.dim() {
        return Err(Error::Dimension(format!(
            "Burgers vector of length {} for a {}-d physical space",
            b_hat.len(),
            pf.dim()
        )));
    }
    Ok(BurgersSplit {
        parallel: pf.parallel_coords(b_hat),
        perp: pf.perp_coords(b_hat),
    })
}
