//! Capped conjugate gradient for the regularized Newton equation
//! `(H + tau_bar * ||g||^delta I) d = -g`.
//!
//! Classic CG iterations run on the shifted operator while monitoring for
//! curvature below `eps` and for residual stagnation. The call returns either
//!
//! * `Sol`: an approximate solution `d` with
//!   `d' Hbar d >= eps ||d||^2`, `||d|| <= 1.1 ||g|| / eps`, and
//!   `||Hbar d + g|| <= (eps * zeta / 2) ||d||`, or
//! * `Nc`: a direction whose `Hbar`-Rayleigh quotient is below `eps`.
//!
//! The operator-norm bound `M` self-corrects: whenever an observed action
//! violates `||H w|| <= M ||w||`, `M` and every derived quantity are updated.
//! The method is deterministic.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;
use crate::linalg::{self, SymOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionKind {
    Sol,
    Nc,
}

/// How the internal condition-number proxy is formed from `M`, the shift, and
/// `eps`. `GradientScaled` divides by `eps * ||g||^delta` instead of `eps`;
/// it is only used by the convex mode of the first-phase Newton-CG variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaRule {
    #[default]
    Standard,
    GradientScaled,
}

#[derive(Debug, Clone)]
pub struct CappedCgParams {
    /// Curvature threshold (`eps > 0`).
    pub eps: f64,
    /// Relative residual accuracy, in (0, 1).
    pub zeta: f64,
    /// Exponent on `||g||` in the shift.
    pub delta: f64,
    /// Shift coefficient; the operator actually inverted is
    /// `H + tau_bar * ||g||^delta I`.
    pub tau_bar: f64,
    /// Initial operator-norm bound (0 means "learn from the first action").
    pub m_init: f64,
    pub kappa_rule: KappaRule,
}

#[derive(Debug, Clone)]
pub struct CappedCgOutcome {
    pub d: Vec<f64>,
    pub kind: DirectionKind,
    /// CG iterations executed.
    pub iterations: usize,
    /// Operator-norm bound after self-correction.
    pub final_m: f64,
    /// Tracked residual `Hbar d + g` (Sol only).
    pub residual: Option<Vec<f64>>,
    /// `d' Hbar d` for the returned direction.
    pub quad_form: f64,
    /// The shift `tau_bar * ||g||^delta` that was applied.
    pub shift: f64,
}

struct Derived {
    zeta_hat: f64,
    sqrt_t: f64,
    sqrt_tau: f64,
}

fn derive(m: f64, shift: f64, params: &CappedCgParams, norm_g: f64) -> Derived {
    let denom = match params.kappa_rule {
        KappaRule::Standard => params.eps,
        KappaRule::GradientScaled => params.eps * fmath::powf(norm_g, params.delta),
    };
    let kappa = ((m + shift) / denom).max(1e-12);
    let sqrt_kappa = fmath::sqrt(kappa);
    let tau = sqrt_kappa / (sqrt_kappa + 1.0);
    let sqrt_tau = fmath::sqrt(tau);
    Derived {
        zeta_hat: params.zeta / (3.0 * kappa),
        sqrt_t: 2.0 * kappa * kappa / (1.0 - sqrt_tau),
        sqrt_tau,
    }
}

/// Runs capped CG. `g` must be nonzero.
pub fn capped_cg<Op: SymOp>(
    op: &mut Op,
    g: &[f64],
    params: &CappedCgParams,
) -> Result<CappedCgOutcome> {
    let m_dim = op.dim();
    if g.len() != m_dim {
        return Err(Error::DimensionMismatch {
            context: "capped_cg",
            expected: m_dim,
            got: g.len(),
        });
    }
    let norm_g = linalg::norm(g);
    if !(norm_g > 0.0) || !norm_g.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!(
            "capped_cg requires a nonzero finite right-hand side, got norm {norm_g}"
        )));
    }
    if !(params.eps > 0.0) || !(params.zeta > 0.0 && params.zeta < 1.0) || params.tau_bar < 0.0 {
        return Err(Error::InvalidConfig(alloc::format!(
            "capped_cg parameters out of range: eps {}, zeta {}, tau_bar {}",
            params.eps,
            params.zeta,
            params.tau_bar
        )));
    }

    let eps = params.eps;
    let shift = params.tau_bar * fmath::powf(norm_g, params.delta);
    let mut m_bound = params.m_init.max(0.0);
    let mut derived = derive(m_bound, shift, params, norm_g);

    let hard_cap = 10 * m_dim + 20;

    let mut y = vec![0.0; m_dim];
    let mut r = g.to_vec();
    let mut p = linalg::scaled(g, -1.0);
    let norm_r0 = norm_g;

    let mut hp = op.apply(&p);
    if !linalg::all_finite(&hp) {
        return Err(Error::NonFinite {
            context: "capped_cg operator action",
        });
    }
    let hbar_quad = |hw: &[f64], w: &[f64]| linalg::dot(w, hw) + shift * linalg::dot(w, w);

    let q0 = hbar_quad(&hp, &p);
    if q0 < eps * linalg::dot(&p, &p) {
        return Ok(CappedCgOutcome {
            quad_form: q0,
            d: p,
            kind: DirectionKind::Nc,
            iterations: 0,
            final_m: m_bound,
            residual: None,
            shift,
        });
    }
    let hp_norm = linalg::norm(&hp);
    if hp_norm > m_bound * linalg::norm(&p) {
        m_bound = hp_norm / linalg::norm(&p);
        derived = derive(m_bound, shift, params, norm_g);
    }

    // y_i iterates are retained for the stagnation branch
    let mut past_y: Vec<Vec<f64>> = vec![y.clone()];
    let mut j = 0usize;

    loop {
        // hp holds H[p_j]; the shifted action is composed as H[p] + shift p
        let mut hbar_p = hp.clone();
        linalg::axpy(shift, &p, &mut hbar_p);
        let p_quad = linalg::dot(&p, &hbar_p);
        let rr = linalg::dot(&r, &r);
        let alpha = rr / p_quad;

        linalg::axpy(alpha, &p, &mut y);
        let mut r_next = r.clone();
        linalg::axpy(alpha, &hbar_p, &mut r_next);
        let rr_next = linalg::dot(&r_next, &r_next);
        let beta = rr_next / rr;
        let mut p_next = linalg::scaled(&r_next, -1.0);
        linalg::axpy(beta, &p, &mut p_next);
        j += 1;

        if !linalg::all_finite(&y) || !rr_next.is_finite() {
            return Err(Error::NonFinite {
                context: "capped_cg iterate",
            });
        }

        let hp_next = op.apply(&p_next);
        let hy = op.apply(&y);
        let hr = op.apply(&r_next);
        if !linalg::all_finite(&hp_next) || !linalg::all_finite(&hy) || !linalg::all_finite(&hr) {
            return Err(Error::NonFinite {
                context: "capped_cg operator action",
            });
        }
        for (hw, w) in [(&hp_next, &p_next), (&hy, &y), (&hr, &r_next)] {
            let wn = linalg::norm(w);
            let hwn = linalg::norm(hw);
            if wn > 0.0 && hwn > m_bound * wn {
                m_bound = hwn / wn;
                derived = derive(m_bound, shift, params, norm_g);
            }
        }

        let y_quad = hbar_quad(&hy, &y);
        let norm_y_sq = linalg::dot(&y, &y);
        if y_quad < eps * norm_y_sq {
            return Ok(CappedCgOutcome {
                d: y,
                kind: DirectionKind::Nc,
                iterations: j,
                final_m: m_bound,
                residual: None,
                quad_form: y_quad,
                shift,
            });
        }
        let norm_r_next = fmath::sqrt(rr_next);
        if norm_r_next <= derived.zeta_hat * norm_r0 {
            return Ok(CappedCgOutcome {
                d: y,
                kind: DirectionKind::Sol,
                iterations: j,
                final_m: m_bound,
                residual: Some(r_next),
                quad_form: y_quad,
                shift,
            });
        }
        let p_next_quad = hbar_quad(&hp_next, &p_next);
        if p_next_quad < eps * linalg::dot(&p_next, &p_next) {
            return Ok(CappedCgOutcome {
                d: p_next,
                kind: DirectionKind::Nc,
                iterations: j,
                final_m: m_bound,
                residual: None,
                quad_form: p_next_quad,
                shift,
            });
        }
        if norm_r_next > derived.sqrt_t * fmath::powf(derived.sqrt_tau, j as f64) * norm_r0 {
            // residual stagnation: a curvature violator exists along the
            // differences of iterates; take one more CG step and scan
            let alpha_next = rr_next / p_next_quad;
            let mut y_extra = y.clone();
            linalg::axpy(alpha_next, &p_next, &mut y_extra);
            for y_i in &past_y {
                let diff = linalg::sub(&y_extra, y_i);
                let nd = linalg::dot(&diff, &diff);
                if nd <= 0.0 {
                    continue;
                }
                let hdiff = op.apply(&diff);
                let q = hbar_quad(&hdiff, &diff);
                if q < eps * nd {
                    return Ok(CappedCgOutcome {
                        d: diff,
                        kind: DirectionKind::Nc,
                        iterations: j,
                        final_m: m_bound,
                        residual: None,
                        quad_form: q,
                        shift,
                    });
                }
            }
            return Err(Error::CappedCgStalled { iterations: j });
        }

        if j >= hard_cap {
            return Err(Error::CappedCgStalled { iterations: j });
        }

        past_y.push(y.clone());
        r = r_next;
        p = p_next;
        hp = hp_next;
    }
}
