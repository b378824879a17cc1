//! Dense symmetric matrix kernels: proximal operators, projections, norms
//! and masked reductions.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::CoordSet;
use crate::rng::rng_from_seed;

/// A dense real symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn ones(n: usize) -> Self {
        SymMatrix(DMatrix::from_element(n, n, 1.0))
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle and mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    /// The 0/1 indicator `1_coords`. The set must be symmetric.
    pub fn indicator(coords: &CoordSet) -> Self {
        assert_eq!(
            coords.rows(),
            coords.cols(),
            "indicator of a non-square region"
        );
        debug_assert!(coords.is_symmetric());
        let n = coords.rows();
        let mut m = DMatrix::zeros(n, n);
        for (i, j) in coords.iter() {
            m[(i, j)] = 1.0;
        }
        SymMatrix(m)
    }

    /// Accepts `m` if it is square and symmetric to within `tol` entrywise;
    /// the stored matrix is the exact symmetric part.
    pub fn from_dense(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape {
                expected: "square matrix".into(),
                found: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        let n = m.nrows();
        for j in 0..n {
            for i in 0..j {
                if (m[(i, j)] - m[(j, i)]).abs() > tol {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self::symmetric_part(m))
    }

    /// `(m + m^T) / 2`.
    pub fn symmetric_part(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SymMatrix((m + t) * 0.5)
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_dense(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dense(self) -> DMatrix<f64> {
        self.0
    }

    /// Entrywise map. Symmetry is preserved because the same function is
    /// applied to mirrored entries.
    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Self {
        SymMatrix(self.0.map(f))
    }

    /// Entries on `coords`, zero elsewhere (`X_beta`). `coords` must be
    /// symmetric.
    pub fn restrict(&self, coords: &CoordSet) -> Self {
        debug_assert!(coords.is_symmetric());
        let n = self.order();
        let mut m = DMatrix::zeros(n, n);
        for (i, j) in coords.iter() {
            m[(i, j)] = self.0[(i, j)];
        }
        SymMatrix(m)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn sum(&self) -> f64 {
        self.0.sum()
    }

    /// Eigenvalues in no particular order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigen(&self.0)?.eigenvalues.iter().copied().collect())
    }

    /// Nuclear norm: the sum of absolute eigenvalues.
    pub fn nuclear_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|v| v.abs()).sum())
    }

    /// Entrywise l1 norm.
    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        SymMatrix(&self.0 * rhs)
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix(-&self.0)
    }
}

/// Read access to a dense matrix, for reductions that accept both general
/// and symmetric operands.
pub trait Dense {
    fn dense(&self) -> &DMatrix<f64>;
}

impl Dense for DMatrix<f64> {
    fn dense(&self) -> &DMatrix<f64> {
        self
    }
}

impl Dense for SymMatrix {
    fn dense(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(Error::Decomposition)
}

/// Rebuilds `sum_k w_k q_k q_k^T` from the eigenvectors with nonzero weight.
fn recompose(eig: &SymmetricEigen<f64, nalgebra::Dyn>, weights: &[f64]) -> SymMatrix {
    let n = eig.eigenvectors.nrows();
    let kept: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] != 0.0).collect();
    if kept.is_empty() {
        return SymMatrix::zeros(n);
    }
    let q = eig.eigenvectors.select_columns(kept.iter());
    let mut scaled = q.clone();
    for (col, &k) in kept.iter().enumerate() {
        scaled.column_mut(col).scale_mut(weights[k]);
    }
    SymMatrix::symmetric_part(scaled * q.transpose())
}

/// Singular value thresholding: the proximal operator of `tau * ||.||_*`.
///
/// For a symmetric input the singular values are the eigenvalue magnitudes,
/// so each eigenvalue `v` is replaced by `sign(v) * max(|v| - tau, 0)`.
pub fn svt(m: &SymMatrix, tau: f64) -> Result<SymMatrix> {
    assert!(tau >= 0.0, "negative threshold {tau}");
    if tau == 0.0 {
        return Ok(m.clone());
    }
    let eig = eigen(&m.0)?;
    let shrunk: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&v| v.signum() * (v.abs() - tau).max(0.0))
        .collect();
    Ok(recompose(&eig, &shrunk))
}

/// Entrywise `sign(x) * max(|x| - tau, 0)`.
pub fn soft_threshold(m: &SymMatrix, tau: f64) -> SymMatrix {
    assert!(tau >= 0.0, "negative threshold {tau}");
    m.map(|x| shrink(x, tau))
}

#[inline]
pub(crate) fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Entrywise clamp to `[lo, hi]`.
pub fn project_box(m: &SymMatrix, lo: f64, hi: f64) -> SymMatrix {
    assert!(lo <= hi, "empty box [{lo}, {hi}]");
    m.map(|x| x.clamp(lo, hi))
}

const BISECTION_TOL: f64 = 1e-10;
const BISECTION_MAX_ITER: usize = 200;

/// Euclidean projection onto `{X : lo <= X <= hi, sum(X) >= s}`.
///
/// If the clamped input already meets the sum bound (up to a relative
/// `1e-12`, so that projecting twice is a no-op) it is the answer.
/// Otherwise the projection is `clamp(M + mu * 1)` for the unique `mu > 0`
/// with `sum = s`; `mu` is bracketed by bisection and then solved exactly on
/// the resulting set of unclamped entries.
const SUM_SLACK: f64 = 1e-12;

pub fn project_box_sum(m: &SymMatrix, lo: f64, hi: f64, s: f64) -> Result<SymMatrix> {
    assert!(lo <= hi, "empty box [{lo}, {hi}]");
    let clamped = project_box(m, lo, hi);
    if clamped.sum() >= s - SUM_SLACK * s.abs().max(1.0) {
        return Ok(clamped);
    }
    let entries = m.0.len() as f64;
    let max = hi * entries;
    if s > max {
        return Err(Error::InfeasibleSum { target: s, max });
    }
    let mu = shift_for_sum(m.0.as_slice(), lo, hi, s);
    Ok(m.map(|x| (x + mu).clamp(lo, hi)))
}

/// Smallest `mu >= 0` with `sum(clamp(x + mu, lo, hi)) >= s`, for `s` no
/// larger than `hi * len`.
pub(crate) fn shift_for_sum(values: &[f64], lo: f64, hi: f64, s: f64) -> f64 {
    let total = |mu: f64| values.iter().map(|&x| (x + mu).clamp(lo, hi)).sum::<f64>();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut a = 0.0;
    let mut b = (hi - min).max(0.0);
    for _ in 0..BISECTION_MAX_ITER {
        if b - a <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (a + b);
        if total(mid) < s {
            a = mid;
        } else {
            b = mid;
        }
    }
    // Exact solve on the active set identified at the bracket midpoint.
    let probe = 0.5 * (a + b);
    let mut fixed = 0.0;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for &x in values {
        let y = x + probe;
        if y <= lo {
            fixed += lo;
        } else if y >= hi {
            fixed += hi;
        } else {
            free_sum += x;
            free += 1;
        }
    }
    if free > 0 {
        let mu = (s - fixed - free_sum) / free as f64;
        let consistent = values.iter().all(|&x| {
            let p = x + probe;
            let y = x + mu;
            if p <= lo {
                y <= lo + BISECTION_TOL
            } else if p >= hi {
                y >= hi - BISECTION_TOL
            } else {
                y >= lo - BISECTION_TOL && y <= hi + BISECTION_TOL
            }
        });
        if consistent && mu >= -BISECTION_TOL {
            return mu.max(0.0);
        }
    }
    b
}

/// Settings for the block power iteration behind [`spectral_norm`].
#[derive(Clone, Debug)]
pub struct PowerIteration {
    /// Relative residual at which the leading Ritz pair is accepted.
    pub tol: f64,
    /// Iteration cap; `None` means `max(10 n, 50)`.
    pub max_iter: Option<usize>,
    /// Seed for the random start block.
    pub seed: u64,
    /// Number of vectors iterated together.
    pub block: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            tol: 1e-8,
            max_iter: None,
            seed: 0x5eed,
            block: 8,
        }
    }
}

/// Largest singular value (largest eigenvalue magnitude) by power iteration
/// with default settings.
pub fn spectral_norm(m: &SymMatrix, tol: f64) -> Result<f64> {
    spectral_norm_with(
        m,
        &PowerIteration {
            tol,
            ..PowerIteration::default()
        },
    )
}

/// Block power iteration with Rayleigh-Ritz extraction.
///
/// A block of `b` vectors is repeatedly multiplied by `M` and
/// re-orthonormalised; the Ritz values of `M` on the block estimate the
/// dominant eigenvalues. The iteration stops once the Ritz pair of largest
/// magnitude `(theta, x)` has `||M x - theta x|| <= tol * |theta|`. Iterating
/// a block keeps the rate governed by the gap to the `(b+1)`-th eigenvalue
/// magnitude, so near-ties at the top (common for random symmetric matrices,
/// whose spectra have two edges of similar magnitude) do not stall it.
pub fn spectral_norm_with(m: &SymMatrix, opts: &PowerIteration) -> Result<f64> {
    assert!(opts.tol > 0.0, "tolerance must be positive");
    let n = m.order();
    if n == 0 {
        return Ok(0.0);
    }
    let a = &m.0;
    let b = opts.block.clamp(1, n);
    let max_iter = opts.max_iter.unwrap_or((10 * n).max(50));

    let mut rng = rng_from_seed(opts.seed);
    let mut block = DMatrix::from_fn(n, b, |_, _| rng.random::<f64>() - 0.5);
    block = orthonormal_columns(block);

    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let image = a * &block;
        // Rayleigh-Ritz on span(block).
        let small = SymMatrix::symmetric_part(block.transpose() * &image);
        let ritz = eigen(&small.0)?;
        let (lead, theta) = ritz
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("block has at least one column");
        estimate = theta.abs();
        let coeffs = ritz.eigenvectors.column(lead);
        let x = &block * coeffs;
        let ax = &image * coeffs;
        let residual = (&ax - &x * theta).norm();
        if residual <= opts.tol * estimate || estimate == 0.0 || b == n {
            return Ok(estimate);
        }
        block = orthonormal_columns(image);
    }
    Err(Error::PowerIteration {
        iterations: max_iter,
        estimate,
    })
}

/// Orthonormal basis of the column span via thin QR. Columns that collapse
/// numerically are replaced by fresh deterministic directions.
fn orthonormal_columns(m: DMatrix<f64>) -> DMatrix<f64> {
    let cols = m.ncols();
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    let scale = (0..cols).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
    if (0..cols).all(|k| r[(k, k)].abs() > 1e-13 * scale.max(f64::MIN_POSITIVE)) {
        return q;
    }
    // Rank-deficient block (e.g. a low-rank matrix). Pad with basis vectors
    // and orthonormalise again; the dominant directions are kept first.
    let n = q.nrows();
    let mut padded = q.clone();
    for k in 0..cols {
        if r[(k, k)].abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            let mut e = DMatrix::zeros(n, 1);
            e[(k % n, 0)] = 1.0;
            e[((k * 7 + 3) % n, 0)] += 0.5;
            padded.set_column(k, &e.column(0));
        }
    }
    padded.qr().q()
}

/// Sum of the entries of `m` on `coords`.
pub fn masked_sum<M: Dense + ?Sized>(m: &M, coords: &CoordSet) -> f64 {
    let d = m.dense();
    coords.iter().map(|(i, j)| d[(i, j)]).sum()
}

/// `<X, Y> = trace(X^T Y)`.
pub fn inner<A: Dense + ?Sized, B: Dense + ?Sized>(x: &A, y: &B) -> f64 {
    x.dense().dot(y.dense())
}

/// Largest absolute entry.
pub fn inf_norm<M: Dense + ?Sized>(m: &M) -> f64 {
    m.dense().iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
