//! Proximal map, first-order residuals, index partitions, scaling vectors,
//! restricted scaled Hessian operators, and approximate stationary-point
//! checkers.
//!
//! Three residuals measure first-order stationarity of
//! `phi(x) = f(x) + lambda * ||x||_1`:
//!
//! * the gradient mapping `G_t(x) = t (x - prox_{lambda/t}(x - grad/t))`,
//! * the minimum-norm subgradient residual `g(x)` with
//!   `dist(0, grad f(x) + lambda * d||x||_1) = ||g(x)||`,
//! * a relaxed residual `g_eps(x)` that forgives coordinates with
//!   `|x_i| <= sqrt(eps_g)` up to a `lambda + eps_g^{3/4}` band.
//!
//! `||G_t(x)|| <= ||g(x)||` for every `t > 0`, and the two coincide for all
//! `t` at or above a computable threshold stepsize ([`matching_stepsize`]).

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fmath;
use crate::linalg::{self, DenseMat, SymOp};
use crate::meo::{self, MeoOutcome};
use crate::oracle::{CompositeProblem, SmoothOracle};

/// Default threshold below which |x_i| counts as zero in sign classification.
/// Classifying exact signs in floating point propagates noise into the
/// residual, so a tiny positive band is used everywhere.
pub const SIGN_THRESHOLD_DEFAULT: f64 = 1e-16;

/// Componentwise soft threshold: `out_i = sign(z_i) * max(|z_i| - a, 0)`.
pub fn soft_threshold(z: &[f64], a: f64) -> Vec<f64> {
    debug_assert!(a >= 0.0);
    z.iter()
        .map(|&zi| {
            let m = zi.abs() - a;
            if m > 0.0 {
                if zi > 0.0 {
                    m
                } else {
                    -m
                }
            } else {
                0.0
            }
        })
        .collect()
}

/// Proximal-gradient update `prox_{(lambda/t)||.||_1}(x - grad/t)`.
pub fn prox_gradient_point(x: &[f64], grad: &[f64], t: f64, lambda: f64) -> Vec<f64> {
    debug_assert!(t > 0.0);
    let z: Vec<f64> = x.iter().zip(grad).map(|(xi, gi)| xi - gi / t).collect();
    soft_threshold(&z, lambda / t)
}

/// Gradient mapping `G_t(x)` from a precomputed gradient.
pub fn gradient_mapping_with_grad(x: &[f64], grad: &[f64], t: f64, lambda: f64) -> Vec<f64> {
    let p = prox_gradient_point(x, grad, t, lambda);
    x.iter().zip(&p).map(|(xi, pi)| t * (xi - pi)).collect()
}

/// Gradient mapping `G_t(x)`; evaluates one gradient.
pub fn gradient_mapping<O: SmoothOracle>(
    problem: &CompositeProblem<O>,
    x: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "gradient mapping stepsize must be positive, got {t}"
        )));
    }
    let grad = problem.oracle.gradient(x);
    if !linalg::all_finite(&grad) {
        return Err(Error::NonFinite {
            context: "gradient_mapping gradient",
        });
    }
    Ok(gradient_mapping_with_grad(x, &grad, t, problem.lambda()))
}

/// Minimum-norm subgradient residual `g(x)` from a precomputed gradient.
pub fn subgradient_residual_with_grad(
    x: &[f64],
    grad: &[f64],
    lambda: f64,
    sign_threshold: f64,
) -> Vec<f64> {
    x.iter()
        .zip(grad)
        .map(|(&xi, &gi)| {
            if xi > sign_threshold {
                gi + lambda
            } else if xi < -sign_threshold {
                gi - lambda
            } else {
                gi - gi.clamp(-lambda, lambda)
            }
        })
        .collect()
}

/// Minimum-norm subgradient residual `g(x)`; evaluates one gradient.
pub fn subgradient_residual<O: SmoothOracle>(problem: &CompositeProblem<O>, x: &[f64]) -> Vec<f64> {
    let grad = problem.oracle.gradient(x);
    subgradient_residual_with_grad(x, &grad, problem.lambda(), SIGN_THRESHOLD_DEFAULT)
}

/// Relaxed residual `g_eps(x)` from a precomputed gradient. Coordinates with
/// `|x_i| <= sqrt(eps_g)` are forgiven up to a `lambda + eps_g^{3/4}` band.
pub fn relaxed_residual_with_grad(x: &[f64], grad: &[f64], lambda: f64, eps_g: f64) -> Vec<f64> {
    let r = fmath::sqrt(eps_g);
    let band = lambda + fmath::powf(eps_g, 0.75);
    x.iter()
        .zip(grad)
        .map(|(&xi, &gi)| {
            if xi > r {
                gi + lambda
            } else if xi < -r {
                gi - lambda
            } else {
                gi - gi.clamp(-band, band)
            }
        })
        .collect()
}

/// Relaxed residual `g_eps(x)`; evaluates one gradient.
pub fn relaxed_residual<O: SmoothOracle>(
    problem: &CompositeProblem<O>,
    x: &[f64],
    eps_g: f64,
) -> Vec<f64> {
    let grad = problem.oracle.gradient(x);
    relaxed_residual_with_grad(x, &grad, problem.lambda(), eps_g)
}

/// Smallest stepsize threshold beyond which the gradient mapping coincides
/// with the subgradient residual: `G_t(x) = g(x)` for all `t >=` the returned
/// value (0 when no support coordinate pushes against its own sign).
pub fn matching_stepsize_with_grad(
    x: &[f64],
    grad: &[f64],
    lambda: f64,
    sign_threshold: f64,
) -> f64 {
    let g = subgradient_residual_with_grad(x, grad, lambda, sign_threshold);
    let mut t_hat = 0.0f64;
    for (&xi, &gi) in x.iter().zip(&g) {
        if (xi > sign_threshold && gi > 0.0) || (xi < -sign_threshold && gi < 0.0) {
            t_hat = t_hat.max(gi / xi);
        }
    }
    t_hat
}

/// See [`matching_stepsize_with_grad`]; evaluates one gradient.
pub fn matching_stepsize<O: SmoothOracle>(problem: &CompositeProblem<O>, x: &[f64]) -> f64 {
    let grad = problem.oracle.gradient(x);
    matching_stepsize_with_grad(x, &grad, problem.lambda(), SIGN_THRESHOLD_DEFAULT)
}

/// Exact-sign and relaxed index partitions of `1..n`.
///
/// The exact row classifies by `|x_i| > sign_threshold`; the relaxed row by
/// `|x_i| > sqrt(eps_g)`. The relaxed positive/negative sets are always
/// contained in the exact ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPartition {
    pub i_plus: Vec<usize>,
    pub i_zero: Vec<usize>,
    pub i_minus: Vec<usize>,
    pub i_neq0: Vec<usize>,
    pub ie_plus: Vec<usize>,
    pub ie_zero: Vec<usize>,
    pub ie_minus: Vec<usize>,
    pub ie_neq0: Vec<usize>,
}

/// Builds the sign/threshold index sets for `x`.
pub fn partition(x: &[f64], eps_g: f64, sign_threshold: f64) -> IndexPartition {
    let r = fmath::sqrt(eps_g);
    let mut p = IndexPartition {
        i_plus: Vec::new(),
        i_zero: Vec::new(),
        i_minus: Vec::new(),
        i_neq0: Vec::new(),
        ie_plus: Vec::new(),
        ie_zero: Vec::new(),
        ie_minus: Vec::new(),
        ie_neq0: Vec::new(),
    };
    for (i, &xi) in x.iter().enumerate() {
        if xi > sign_threshold {
            p.i_plus.push(i);
            p.i_neq0.push(i);
        } else if xi < -sign_threshold {
            p.i_minus.push(i);
            p.i_neq0.push(i);
        } else {
            p.i_zero.push(i);
        }
        if xi > r {
            p.ie_plus.push(i);
            p.ie_neq0.push(i);
        } else if xi < -r {
            p.ie_minus.push(i);
            p.ie_neq0.push(i);
        } else {
            p.ie_zero.push(i);
        }
    }
    p
}

/// Scaling vector: `s_i = 1` when `|x_i| > sqrt(eps_g)`, else `s_i = x_i`.
pub fn scaling(x: &[f64], eps_g: f64) -> Vec<f64> {
    let r = fmath::sqrt(eps_g);
    x.iter()
        .map(|&xi| if xi.abs() > r { 1.0 } else { xi })
        .collect()
}

/// Restriction of the scaled Hessian to an index set, realized matrix-free as
/// scatter → scale → `hess_vec` → scale → gather. Each action costs exactly
/// one Hessian-vector product.
pub struct RestrictedScaledOperator<'a, O: SmoothOracle> {
    oracle: &'a O,
    x: &'a [f64],
    indices: &'a [usize],
    scale: Vec<f64>,
    applies: usize,
    buf: Vec<f64>,
}

impl<'a, O: SmoothOracle> SymOp for RestrictedScaledOperator<'a, O> {
    fn dim(&self) -> usize {
        self.indices.len()
    }

    fn apply(&mut self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.indices.len());
        self.buf.iter_mut().for_each(|b| *b = 0.0);
        for (k, &i) in self.indices.iter().enumerate() {
            self.buf[i] = self.scale[k] * v[k];
        }
        let hv = self.oracle.hess_vec(self.x, &self.buf);
        self.applies += 1;
        self.indices
            .iter()
            .enumerate()
            .map(|(k, &i)| self.scale[k] * hv[i])
            .collect()
    }

    fn applies(&self) -> usize {
        self.applies
    }
}

/// Builds the operator `v -> (S ∇²f(x) S)_J v` with `S = Diag(s)`.
pub fn restricted_scaled_operator<'a, O: SmoothOracle>(
    problem: &'a CompositeProblem<O>,
    x: &'a [f64],
    indices: &'a [usize],
    s: &[f64],
) -> Result<RestrictedScaledOperator<'a, O>> {
    if indices.is_empty() {
        return Err(Error::EmptyIndexSet {
            context: "restricted_scaled_operator",
        });
    }
    let n = problem.dim();
    if x.len() != n || s.len() != n {
        return Err(Error::DimensionMismatch {
            context: "restricted_scaled_operator",
            expected: n,
            got: if x.len() != n { x.len() } else { s.len() },
        });
    }
    Ok(RestrictedScaledOperator {
        oracle: &problem.oracle,
        x,
        indices,
        scale: indices.iter().map(|&i| s[i]).collect(),
        applies: 0,
        buf: vec![0.0; n],
    })
}

/// Unscaled restriction `v -> (∇²f(x))_J v`.
pub fn restricted_operator<'a, O: SmoothOracle>(
    problem: &'a CompositeProblem<O>,
    x: &'a [f64],
    indices: &'a [usize],
) -> Result<RestrictedScaledOperator<'a, O>> {
    if indices.is_empty() {
        return Err(Error::EmptyIndexSet {
            context: "restricted_operator",
        });
    }
    let n = problem.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            context: "restricted_operator",
            expected: n,
            got: x.len(),
        });
    }
    Ok(RestrictedScaledOperator {
        oracle: &problem.oracle,
        x,
        indices,
        scale: vec![1.0; indices.len()],
        applies: 0,
        buf: vec![0.0; n],
    })
}

/// Lower bound that the scaled Hessian places on the restricted Hessian's
/// smallest eigenvalue. Returns `(lhs, rhs)` with
/// `lhs = lambda_min(H)` and
/// `rhs = min(lambda_min(S H S), 0) / min_i x_i^2`; the bound `lhs >= rhs`
/// holds in the regime where `s` agrees with `x` on every coordinate.
pub fn remark23_bound(h_sub: &DenseMat, s_sub: &[f64], x_sub: &[f64]) -> Result<(f64, f64)> {
    let m = h_sub.rows();
    if h_sub.cols() != m || s_sub.len() != m || x_sub.len() != m {
        return Err(Error::DimensionMismatch {
            context: "remark23_bound",
            expected: m,
            got: if h_sub.cols() != m {
                h_sub.cols()
            } else if s_sub.len() != m {
                s_sub.len()
            } else {
                x_sub.len()
            },
        });
    }
    for (i, &xi) in x_sub.iter().enumerate() {
        if xi == 0.0 {
            return Err(Error::ZeroComponent {
                context: "remark23_bound",
                index: i,
            });
        }
    }
    let lhs = linalg::sym_min_eig(h_sub)?;
    let shs = DenseMat::from_fn(m, m, |i, j| s_sub[i] * h_sub.get(i, j) * s_sub[j]);
    let min_scaled = linalg::sym_min_eig(&shs)?.min(0.0);
    let min_sq = x_sub
        .iter()
        .map(|x| x * x)
        .fold(f64::INFINITY, |a, b| a.min(b));
    Ok((lhs, min_scaled / min_sq))
}

/// How second-order curvature is probed by the stationary-point checkers.
#[derive(Debug, Clone, Copy)]
pub enum CurvatureProbe {
    /// Randomized Lanczos estimate with the stated certificate failure
    /// probability.
    Lanczos { sigma: f64 },
    /// Exact dense eigensolve (materializes the restricted operator; meant
    /// for small test problems).
    Dense,
}

/// Evidence record produced by the stationary-point checkers and attached to
/// solver reports.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityCertificate {
    pub first_order: bool,
    /// None when only a first-order check ran.
    pub second_order: Option<bool>,
    /// Norm of the residual the first-order check used.
    pub residual_norm: f64,
    /// Gradient-mapping stepsize for strong checks; None for weak checks.
    pub t: Option<f64>,
    /// Minimum-eigenvalue estimate. None when the support is empty or when a
    /// Lanczos certificate finished without a witnessing Ritz pair.
    pub lambda_min: Option<f64>,
    /// Certificate failure probability, when curvature came from Lanczos.
    pub sigma: Option<f64>,
    /// |I_neq0| at the checked point; 0 makes the curvature condition vacuous.
    pub support_size: usize,
}

/// Strong first-order check: `||G_t(x)|| <= eps_g` at `t = max(1, t_hat)`.
/// Fixing this `t` makes the check equivalent to `||g(x)|| <= eps_g` while
/// keeping the certificate stepsize explicit.
pub fn is_strong_first_order<O: SmoothOracle>(
    problem: &CompositeProblem<O>,
    x: &[f64],
    eps_g: f64,
) -> Result<(bool, StationarityCertificate)> {
    let grad = problem.oracle.gradient(x);
    if !linalg::all_finite(&grad) {
        return Err(Error::NonFinite {
            context: "is_strong_first_order gradient",
        });
    }
    let t =
        matching_stepsize_with_grad(x, &grad, problem.lambda(), SIGN_THRESHOLD_DEFAULT).max(1.0);
    let gt = gradient_mapping_with_grad(x, &grad, t, problem.lambda());
    let norm = linalg::norm(&gt);
    let ok = norm <= eps_g;
    Ok((
        ok,
        StationarityCertificate {
            first_order: ok,
            second_order: None,
            residual_norm: norm,
            t: Some(t),
            lambda_min: None,
            sigma: None,
            support_size: partition(x, eps_g, SIGN_THRESHOLD_DEFAULT).i_neq0.len(),
        },
    ))
}

/// Weak first-order check: `||g_eps(x)|| <= eps_g`.
pub fn is_weak_first_order<O: SmoothOracle>(
    problem: &CompositeProblem<O>,
    x: &[f64],
    eps_g: f64,
) -> Result<(bool, StationarityCertificate)> {
    let grad = problem.oracle.gradient(x);
    if !linalg::all_finite(&grad) {
        return Err(Error::NonFinite {
            context: "is_weak_first_order gradient",
        });
    }
    let geps = relaxed_residual_with_grad(x, &grad, problem.lambda(), eps_g);
    let norm = linalg::norm(&geps);
    let ok = norm <= eps_g;
    Ok((
        ok,
        StationarityCertificate {
            first_order: ok,
            second_order: None,
            residual_norm: norm,
            t: None,
            lambda_min: None,
            sigma: None,
            support_size: partition(x, eps_g, SIGN_THRESHOLD_DEFAULT).i_neq0.len(),
        },
    ))
}

fn curvature_ok<O: SmoothOracle, R: Rng>(
    problem: &CompositeProblem<O>,
    x: &[f64],
    eps_g: f64,
    eps_h: f64,
    probe: CurvatureProbe,
    rng: &mut R,
    cert: &mut StationarityCertificate,
) -> Result<bool> {
    let part = partition(x, eps_g, SIGN_THRESHOLD_DEFAULT);
    cert.support_size = part.i_neq0.len();
    if part.i_neq0.is_empty() {
        // nothing to test curvature on; the condition holds vacuously
        cert.lambda_min = None;
        return Ok(true);
    }
    let s = scaling(x, eps_g);
    let mut op = restricted_scaled_operator(problem, x, &part.i_neq0, &s)?;
    match probe {
        CurvatureProbe::Dense => {
            let (lam, _) = meo::dense_min_eigpair(&mut op)?;
            cert.lambda_min = Some(lam);
            Ok(lam >= -eps_h)
        }
        CurvatureProbe::Lanczos { sigma } => {
            cert.sigma = Some(sigma);
            match meo::meo(&mut op, eps_h, sigma, None, rng)? {
                MeoOutcome::Certificate { .. } => Ok(true),
                MeoOutcome::NegativeCurvature { lambda_hat, .. } => {
                    cert.lambda_min = Some(lambda_hat);
                    Ok(lambda_hat >= -eps_h)
                }
            }
        }
    }
}

/// Strong* second-order check: strong first-order plus
/// `lambda_min((S ∇²f(x) S)_{I_neq0}) >= -eps_h`.
pub fn is_strong_star_second_order<O: SmoothOracle, R: Rng>(
    problem: &CompositeProblem<O>,
    x: &[f64],
    eps_g: f64,
    eps_h: f64,
    probe: CurvatureProbe,
    rng: &mut R,
) -> Result<(bool, StationarityCertificate)> {
    let (first, mut cert) = is_strong_first_order(problem, x, eps_g)?;
    let second = curvature_ok(problem, x, eps_g, eps_h, probe, rng, &mut cert)?;
    cert.second_order = Some(second);
    Ok((first && second, cert))
}

/// Weak second-order check: weak first-order plus the same scaled curvature
/// condition as the strong* check.
pub fn is_weak_second_order<O: SmoothOracle, R: Rng>(
    problem: &CompositeProblem<O>,
    x: &[f64],
    eps_g: f64,
    eps_h: f64,
    probe: CurvatureProbe,
    rng: &mut R,
) -> Result<(bool, StationarityCertificate)> {
    let (first, mut cert) = is_weak_first_order(problem, x, eps_g)?;
    let second = curvature_ok(problem, x, eps_g, eps_h, probe, rng, &mut cert)?;
    cert.second_order = Some(second);
    Ok((first && second, cert))
}
