//! Dense vectors, a small dense matrix type, and the symmetric eigensolvers
//! used by test oracles, the Lanczos Rayleigh–Ritz step, and the scaled-Hessian
//! bound. Everything here is desk scale (n up to ~1024); no BLAS.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fmath;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    fmath::sqrt(dot(a, a))
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn norm_l1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(a: &[f64], alpha: f64) -> Vec<f64> {
    a.iter().map(|x| alpha * x).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.data.chunks_exact(self.cols).map(|row| dot(row, x)).collect()
    }

    /// `A^T x`
    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (xi, row) in x.iter().zip(self.data.chunks_exact(self.cols)) {
            axpy(*xi, row, &mut out);
        }
        out
    }

    /// Principal submatrix on the given (sorted) index list.
    pub fn principal_submatrix(&self, idx: &[usize]) -> DenseMat {
        DenseMat::from_fn(idx.len(), idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    /// Builds `Q diag(eigs) Q^T`.
    pub fn from_spectrum(q: &DenseMat, eigs: &[f64]) -> DenseMat {
        let n = q.rows();
        debug_assert_eq!(eigs.len(), n);
        DenseMat::from_fn(n, n, |i, j| {
            (0..n).map(|k| q.get(i, k) * eigs[k] * q.get(j, k)).sum()
        })
    }
}

/// Action-only symmetric operator. Implementors keep their own apply counter
/// so callers can fold operator work into Hessian-vector-product accounting.
pub trait SymOp {
    fn dim(&self) -> usize;
    fn apply(&mut self, v: &[f64]) -> Vec<f64>;
    fn applies(&self) -> usize;
}

/// Dense symmetric operator, mostly for tests and small instances.
#[derive(Debug, Clone)]
pub struct DenseOp {
    pub mat: DenseMat,
    applies: usize,
}

impl DenseOp {
    pub fn new(mat: DenseMat) -> Self {
        assert_eq!(mat.rows(), mat.cols());
        Self { mat, applies: 0 }
    }
}

impl SymOp for DenseOp {
    fn dim(&self) -> usize {
        self.mat.rows()
    }

    fn apply(&mut self, v: &[f64]) -> Vec<f64> {
        self.applies += 1;
        self.mat.matvec(v)
    }

    fn applies(&self) -> usize {
        self.applies
    }
}

/// Materializes an action-only operator into a dense symmetric matrix by
/// applying it to the standard basis (`dim` applies). The result is
/// symmetrized to wash out roundoff asymmetry.
pub fn materialize_sym(op: &mut dyn SymOp) -> DenseMat {
    let n = op.dim();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(op.apply(&e));
    }
    DenseMat::from_fn(n, n, |i, j| 0.5 * (cols[j][i] + cols[i][j]))
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// columns of the returned matrix.
pub fn sym_eigen(a: &DenseMat) -> Result<(Vec<f64>, DenseMat)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "sym_eigen",
            expected: n,
            got: a.cols(),
        });
    }
    if !all_finite(&a.data) {
        return Err(Error::NonFinite {
            context: "sym_eigen input",
        });
    }
    let mut m = a.clone();
    let mut v = DenseMat::identity(n);
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(0.0f64, |acc, (i, j)| acc.max(m.get(i, j).abs()))
        .max(1e-300);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.get(i, j) * m.get(i, j);
            }
        }
        if fmath::sqrt(off) <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let tau = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + fmath::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + fmath::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / fmath::sqrt(1.0 + t * t);
                let s = t * c;
                for i in 0..n {
                    let mip = m.get(i, p);
                    let miq = m.get(i, q);
                    m.set(i, p, c * mip - s * miq);
                    m.set(i, q, s * mip + c * miq);
                }
                for i in 0..n {
                    let mpi = m.get(p, i);
                    let mqi = m.get(q, i);
                    m.set(p, i, c * mpi - s * mqi);
                    m.set(q, i, s * mpi + c * mqi);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let vectors = DenseMat::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok((values, vectors))
}

/// Minimum eigenvalue of a symmetric matrix (convenience over [`sym_eigen`]).
pub fn sym_min_eig(a: &DenseMat) -> Result<f64> {
    Ok(sym_eigen(a)?.0[0])
}

/// Minimum eigenpair of a symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e.len() == d.len() - 1`). Sturm-sequence bisection for
/// the value, inverse iteration for the vector; the returned value is the
/// Rayleigh quotient of the returned unit vector.
pub fn tridiag_min_eigpair(d: &[f64], e: &[f64]) -> (f64, Vec<f64>) {
    let n = d.len();
    assert!(n >= 1 && e.len() + 1 == n);
    if n == 1 {
        return (d[0], vec![1.0]);
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < n - 1 { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    let tiny = 1e-300;

    // Number of eigenvalues strictly below x.
    let count_below = |x: f64| -> usize {
        let mut q = d[0] - x;
        let mut cnt = usize::from(q < 0.0);
        for i in 1..n {
            if q.abs() < tiny {
                q = -tiny;
            }
            q = d[i] - x - e[i - 1] * e[i - 1] / q;
            cnt += usize::from(q < 0.0);
        }
        cnt
    };

    let mut a = lo - 1e-12 * scale;
    let mut b = hi + 1e-12 * scale;
    for _ in 0..200 {
        if b - a <= 1e-15 * scale {
            break;
        }
        let mid = 0.5 * (a + b);
        if count_below(mid) >= 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let lambda = 0.5 * (a + b);

    // Inverse iteration on (T - shift I) with a pivoted tridiagonal solve.
    let mut w = vec![1.0; n];
    for (i, wi) in w.iter_mut().enumerate() {
        // deterministic jitter to avoid an unlucky orthogonal start
        *wi = 1.0 + 0.37 * fmath::cos(1.7 * (i as f64 + 1.0));
    }
    let mut shift = lambda;
    for attempt in 0..4 {
        let mut ok = true;
        for _ in 0..3 {
            match solve_tridiag_shifted(d, e, shift, &w) {
                Some(sol) => {
                    let nrm = norm(&sol);
                    if !nrm.is_finite() || nrm == 0.0 {
                        ok = false;
                        break;
                    }
                    w = scaled(&sol, 1.0 / nrm);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            break;
        }
        shift = lambda - (1e-12 * scale) * ((attempt + 1) as f64);
        w = vec![1.0; n];
    }

    // Rayleigh quotient of the computed vector.
    let mut tw = vec![0.0; n];
    for i in 0..n {
        tw[i] = d[i] * w[i];
        if i > 0 {
            tw[i] += e[i - 1] * w[i - 1];
        }
        if i < n - 1 {
            tw[i] += e[i] * w[i + 1];
        }
    }
    (dot(&w, &tw), w)
}

/// Solves `(T - shift I) x = rhs` for tridiagonal `T` using Gaussian
/// elimination with partial pivoting (one extra superdiagonal of fill-in).
fn solve_tridiag_shifted(d: &[f64], e: &[f64], shift: f64, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = d.len();
    // Row i holds (main[i], upper1[i], upper2[i]) in columns i, i+1, i+2;
    // lower[i] is the column-i entry of row i+1.
    let mut main: Vec<f64> = d.iter().map(|x| x - shift).collect();
    let mut upper1 = vec![0.0; n];
    let mut upper2 = vec![0.0; n];
    let mut lower = vec![0.0; n];
    upper1[..n - 1].copy_from_slice(e);
    lower[..n - 1].copy_from_slice(e);
    let mut b = rhs.to_vec();

    for i in 0..n - 1 {
        if lower[i].abs() > main[i].abs() {
            // swap rows i and i+1 (row i+1 has no column-(i+3) entry yet)
            core::mem::swap(&mut main[i], &mut lower[i]);
            core::mem::swap(&mut upper1[i], &mut main[i + 1]);
            core::mem::swap(&mut upper2[i], &mut upper1[i + 1]);
            b.swap(i, i + 1);
        }
        if main[i].abs() < 1e-300 {
            main[i] = 1e-300;
        }
        let m = lower[i] / main[i];
        main[i + 1] -= m * upper1[i];
        upper1[i + 1] -= m * upper2[i];
        b[i + 1] -= m * b[i];
        lower[i] = 0.0;
    }
    if main[n - 1].abs() < 1e-300 {
        main[n - 1] = 1e-300;
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= upper1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= upper2[i] * x[i + 2];
        }
        x[i] = s / main[i];
        if !x[i].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// Random orthogonal matrix via modified Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DenseMat {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut failed = false;
        for _ in 0..n {
            let mut c: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
            for _pass in 0..2 {
                let prev = cols.clone();
                for p in &prev {
                    let proj = dot(&c, p);
                    axpy(-proj, p, &mut c);
                }
            }
            let nrm = norm(&c);
            if nrm < 1e-8 {
                failed = true;
                break;
            }
            cols.push(scaled(&c, 1.0 / nrm));
        }
        if !failed {
            return DenseMat::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

/// Standard normal draw by Box–Muller (two uniforms per sample).
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1]
    let u2: f64 = rng.gen();
    fmath::sqrt(-2.0 * fmath::ln(u1)) * fmath::cos(2.0 * core::f64::consts::PI * u2)
}

/// Uniformly random unit vector.
pub fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
        let nrm = norm(&v);
        if nrm > 1e-12 {
            return scaled(&v, 1.0 / nrm);
        }
    }
}
