//! Randomized minimum-eigenvalue oracle.
//!
//! Given an action-only symmetric operator `H` and a threshold `eps > 0`, the
//! oracle either certifies `lambda_min(H) >= -eps` (a certificate that is
//! wrong with probability at most `sigma`) or returns a unit vector whose
//! Rayleigh quotient is at most `-eps/2`.
//!
//! The method is Lanczos from a uniformly random unit start vector with full
//! reorthogonalization (ghost eigenvalues would wreck the statistical
//! contract at desk scale, and the O(N·m) cost per sweep is affordable). The
//! sweep budget is
//! `N = min(m, 1 + ceil(0.5 * ln(2.75 m / sigma^2) * sqrt(M) / sqrt(eps)))`
//! where `M` bounds the operator norm; when no bound is supplied a 20-step
//! power iteration estimates it, and those applications are counted like any
//! other operator action.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fmath;
use crate::linalg::{self, SymOp};

#[derive(Debug, Clone)]
pub enum MeoOutcome {
    /// All eigenvalues exceed `-eps` with probability at least `1 - sigma`.
    Certificate { sigma: f64, lanczos_iters: usize },
    /// Unit direction with `v' H v = lambda_hat <= -eps/2`.
    NegativeCurvature {
        lambda_hat: f64,
        v: Vec<f64>,
        lanczos_iters: usize,
    },
}

impl MeoOutcome {
    pub fn lanczos_iters(&self) -> usize {
        match self {
            MeoOutcome::Certificate { lanczos_iters, .. } => *lanczos_iters,
            MeoOutcome::NegativeCurvature { lanczos_iters, .. } => *lanczos_iters,
        }
    }
}

/// Runs the oracle. `m_hint`, when given, is used as the operator-norm bound
/// in the sweep budget instead of the power-iteration estimate.
pub fn meo<Op: SymOp, R: Rng>(
    op: &mut Op,
    eps: f64,
    sigma: f64,
    m_hint: Option<f64>,
    rng: &mut R,
) -> Result<MeoOutcome> {
    let m = op.dim();
    if m == 0 {
        return Err(Error::EmptyIndexSet { context: "meo" });
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!(
            "meo eps must be positive, got {eps}"
        )));
    }
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::InvalidConfig(alloc::format!(
            "meo sigma must lie in [0, 1), got {sigma}"
        )));
    }

    let norm_bound = match m_hint {
        Some(b) => b.max(0.0),
        None => power_iteration_norm(op, 20, rng)?,
    };
    let budget = if sigma == 0.0 {
        m
    } else {
        let raw = 0.5 * fmath::ln(2.75 * m as f64 / (sigma * sigma)) * fmath::sqrt(norm_bound)
            / fmath::sqrt(eps);
        if raw.is_finite() {
            m.min(1 + fmath::ceil(raw) as usize)
        } else {
            m
        }
    };
    let budget = budget.max(1);
    let breakdown_tol = 1e-12 * (1.0 + norm_bound);

    // Lanczos with full reorthogonalization.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(budget);
    basis.push(linalg::random_unit_vector(m, rng));
    let mut alphas: Vec<f64> = Vec::with_capacity(budget);
    let mut betas: Vec<f64> = Vec::with_capacity(budget);

    for j in 0..budget {
        let v_j = basis[j].clone();
        let mut w = op.apply(&v_j);
        if !linalg::all_finite(&w) {
            return Err(Error::NonFinite {
                context: "meo operator action",
            });
        }
        let alpha = linalg::dot(&v_j, &w);
        alphas.push(alpha);
        linalg::axpy(-alpha, &v_j, &mut w);
        if j > 0 {
            linalg::axpy(-betas[j - 1], &basis[j - 1], &mut w);
        }
        // two reorthogonalization passes
        for _ in 0..2 {
            for b in &basis {
                let c = linalg::dot(b, &w);
                linalg::axpy(-c, b, &mut w);
            }
        }

        // Rayleigh-Ritz on the tridiagonal section built so far
        let (ritz, ritz_vec) = linalg::tridiag_min_eigpair(&alphas, &betas);
        if ritz <= -0.5 * eps {
            let mut v = vec![0.0; m];
            for (w_i, b) in ritz_vec.iter().zip(&basis) {
                linalg::axpy(*w_i, b, &mut v);
            }
            let nrm = linalg::norm(&v);
            if nrm > 0.0 {
                let v = linalg::scaled(&v, 1.0 / nrm);
                let hv = op.apply(&v);
                let lambda_hat = linalg::dot(&v, &hv);
                // only release a direction that genuinely clears the bar
                if lambda_hat <= -0.5 * eps {
                    return Ok(MeoOutcome::NegativeCurvature {
                        lambda_hat,
                        v,
                        lanczos_iters: j + 1,
                    });
                }
            }
        }

        let beta = linalg::norm(&w);
        if beta <= breakdown_tol {
            // exact invariant subspace: the Ritz values seen are exact
            // eigenvalues of the restriction, and none cleared the bar
            return Ok(MeoOutcome::Certificate {
                sigma,
                lanczos_iters: j + 1,
            });
        }
        if j + 1 < budget {
            betas.push(beta);
            basis.push(linalg::scaled(&w, 1.0 / beta));
        }
    }

    Ok(MeoOutcome::Certificate {
        sigma,
        lanczos_iters: budget,
    })
}

/// Exact minimum eigenpair by materializing the operator and running the
/// dense symmetric eigensolver. Intended for small dimensions (test oracles,
/// curvature reports).
pub fn dense_min_eigpair<Op: SymOp>(op: &mut Op) -> Result<(f64, Vec<f64>)> {
    let m = op.dim();
    if m == 0 {
        return Err(Error::EmptyIndexSet {
            context: "dense_min_eigpair",
        });
    }
    let dense = linalg::materialize_sym(op);
    let (vals, vecs) = linalg::sym_eigen(&dense)?;
    Ok((vals[0], (0..m).map(|i| vecs.get(i, 0)).collect()))
}

/// 20-step power iteration lower estimate of the operator norm.
fn power_iteration_norm<Op: SymOp, R: Rng>(op: &mut Op, steps: usize, rng: &mut R) -> Result<f64> {
    let m = op.dim();
    let mut v = linalg::random_unit_vector(m, rng);
    let mut est = 0.0f64;
    for _ in 0..steps {
        let w = op.apply(&v);
        if !linalg::all_finite(&w) {
            return Err(Error::NonFinite {
                context: "power iteration",
            });
        }
        let nrm = linalg::norm(&w);
        est = est.max(nrm);
        if nrm <= 1e-300 {
            break;
        }
        v = linalg::scaled(&w, 1.0 / nrm);
    }
    Ok(est)
}
