//! Problem abstraction: smooth-part oracles and the composite problem.
//!
//! Solvers never see problem structure beyond this trait; second-order access
//! is matrix-free through [`SmoothOracle::hess_vec`]. The optional dense
//! Hessian exists for brute-force test oracles and small built-in problems.
//! No Lipschitz-type constants are ever required as inputs; the one running
//! bound the capped CG solver uses is self-updating.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMat};

/// Evaluation bundle for the smooth part `f`.
///
/// Implementations must be safe to evaluate concurrently (no interior
/// mutation during calls); each solver run is single-threaded but runs over
/// shared problems may proceed in parallel.
pub trait SmoothOracle: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Product `∇²f(x) · v`.
    fn hess_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64>;
    /// Dense Hessian, if the problem is small enough to afford one.
    fn dense_hessian(&self, _x: &[f64]) -> Option<DenseMat> {
        None
    }
}

/// `f(x) + lambda * ||x||_1` with `lambda > 0`.
pub struct CompositeProblem<O: SmoothOracle> {
    pub oracle: O,
    lambda: f64,
}

impl<O: SmoothOracle> CompositeProblem<O> {
    pub fn new(oracle: O, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self { oracle, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    /// Full objective `f(x) + lambda * ||x||_1`. Convenience for callers and
    /// tests; solvers evaluate through their counting wrappers instead.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.oracle.value(x) + self.lambda * linalg::norm_l1(x)
    }
}

/// Wraps an oracle and counts every callback. Used in tests to verify that
/// solver-reported counters equal the callbacks actually issued.
pub struct CountingOracle<O: SmoothOracle> {
    pub inner: O,
    values: AtomicUsize,
    gradients: AtomicUsize,
    hess_vecs: AtomicUsize,
}

impl<O: SmoothOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            values: AtomicUsize::new(0),
            gradients: AtomicUsize::new(0),
            hess_vecs: AtomicUsize::new(0),
        }
    }

    pub fn value_calls(&self) -> usize {
        self.values.load(Ordering::Relaxed)
    }

    pub fn gradient_calls(&self) -> usize {
        self.gradients.load(Ordering::Relaxed)
    }

    pub fn hess_vec_calls(&self) -> usize {
        self.hess_vecs.load(Ordering::Relaxed)
    }
}

impl<O: SmoothOracle> SmoothOracle for CountingOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.values.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.gradients.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x)
    }

    fn hess_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        self.hess_vecs.fetch_add(1, Ordering::Relaxed);
        self.inner.hess_vec(x, v)
    }

    fn dense_hessian(&self, x: &[f64]) -> Option<DenseMat> {
        self.inner.dense_hessian(x)
    }
}

/// Finite-difference consistency report from [`check_oracle`].
#[derive(Debug, Clone)]
pub struct OracleCheck {
    /// Max over probe directions of |u'∇f(x) - (f(x+hu)-f(x-hu))/2h| / (1+|f|).
    pub max_gradient_error: f64,
    /// Max over probe directions of the relative mismatch between
    /// `∇²f(x)·u` and central differences of the gradient.
    pub max_hess_vec_error: f64,
    /// Set when an oracle output was NaN or infinite, naming the callback.
    pub failure: Option<String>,
}

impl OracleCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.failure.is_none() && self.max_gradient_error <= tol && self.max_hess_vec_error <= tol
    }
}

/// Checks gradient and Hessian-vector products against central finite
/// differences of the oracle along 10 random directions (fixed internal seed,
/// so the probe is deterministic). Does not modify any state.
pub fn check_oracle<O: SmoothOracle>(oracle: &O, x: &[f64], h: f64) -> Result<OracleCheck> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidConfig(format!("h must be positive, got {h}")));
    }
    if !linalg::all_finite(x) {
        return Err(Error::NonFinite {
            context: "check_oracle base point",
        });
    }
    let n = oracle.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            context: "check_oracle",
            expected: n,
            got: x.len(),
        });
    }

    let mut rng = ChaCha20Rng::seed_from_u64(0x0c4a_c1e5);
    let mut report = OracleCheck {
        max_gradient_error: 0.0,
        max_hess_vec_error: 0.0,
        failure: None,
    };

    let fx = oracle.value(x);
    if !fx.is_finite() {
        report.failure = Some(format!("value at base point is {fx}"));
        return Ok(report);
    }
    let grad = oracle.gradient(x);
    if !linalg::all_finite(&grad) {
        report.failure = Some(String::from("gradient at base point is non-finite"));
        return Ok(report);
    }

    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for _ in 0..10 {
        let u = linalg::random_unit_vector(n, &mut rng);
        for i in 0..n {
            plus[i] = x[i] + h * u[i];
            minus[i] = x[i] - h * u[i];
        }

        let f_plus = oracle.value(&plus);
        let f_minus = oracle.value(&minus);
        if !f_plus.is_finite() || !f_minus.is_finite() {
            report.failure = Some(String::from("value at probe point is non-finite"));
            return Ok(report);
        }
        let fd_dir = (f_plus - f_minus) / (2.0 * h);
        let grad_dir = linalg::dot(&grad, &u);
        let g_err = (fd_dir - grad_dir).abs() / (1.0 + fx.abs());
        report.max_gradient_error = report.max_gradient_error.max(g_err);

        let g_plus = oracle.gradient(&plus);
        let g_minus = oracle.gradient(&minus);
        if !linalg::all_finite(&g_plus) || !linalg::all_finite(&g_minus) {
            report.failure = Some(String::from("gradient at probe point is non-finite"));
            return Ok(report);
        }
        let hv = oracle.hess_vec(x, &u);
        if !linalg::all_finite(&hv) {
            report.failure = Some(String::from("hess_vec output is non-finite"));
            return Ok(report);
        }
        let mut err = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..n {
            let fd = (g_plus[i] - g_minus[i]) / (2.0 * h);
            err += (fd - hv[i]) * (fd - hv[i]);
            scale = scale.max(hv[i].abs());
        }
        let h_err = crate::fmath::sqrt(err) / scale;
        report.max_hess_vec_error = report.max_hess_vec_error.max(h_err);
    }
    Ok(report)
}

/// Checks that `hess_vec(x, .)` behaves as a symmetric bilinear form along
/// 10 random direction pairs: returns the worst relative linearity error
/// (`H(au + bv)` vs `a Hu + b Hv`) and the worst relative symmetry error
/// (`u' Hv` vs `v' Hu`). Deterministic probe, fixed internal seed.
pub fn check_hess_vec_form<O: SmoothOracle>(oracle: &O, x: &[f64]) -> (f64, f64) {
    let n = oracle.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(0x0b11_f02e);
    let mut max_lin = 0.0f64;
    let mut max_sym = 0.0f64;
    for _ in 0..10 {
        let u = linalg::random_unit_vector(n, &mut rng);
        let v = linalg::random_unit_vector(n, &mut rng);
        let a: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(-2.0..2.0);
        let hu = oracle.hess_vec(x, &u);
        let hv = oracle.hess_vec(x, &v);
        let combo: Vec<f64> = u.iter().zip(&v).map(|(ui, vi)| a * ui + b * vi).collect();
        let h_combo = oracle.hess_vec(x, &combo);
        let mut scale = 1.0f64;
        let mut err = 0.0f64;
        for i in 0..n {
            let want = a * hu[i] + b * hv[i];
            err += (h_combo[i] - want) * (h_combo[i] - want);
            scale = scale.max(want.abs());
        }
        max_lin = max_lin.max(crate::fmath::sqrt(err) / scale);

        let uhv = linalg::dot(&u, &hv);
        let vhu = linalg::dot(&v, &hu);
        max_sym = max_sym.max((uhv - vhu).abs() / (1.0 + uhv.abs()));
    }
    (max_lin, max_sym)
}
