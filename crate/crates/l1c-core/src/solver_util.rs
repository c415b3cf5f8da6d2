//! Internals shared by both solvers: a counting evaluator, the three line
//! searches, and the common second phase (scaled-curvature certificate or
//! cubic-decrease escape step).

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fmath;
use crate::linalg::{self, SymOp};
use crate::meo::{self, MeoOutcome};
use crate::oracle::{CompositeProblem, SmoothOracle};
use crate::stationarity::{
    partition, restricted_scaled_operator, scaling, subgradient_residual_with_grad,
};
use crate::trace::OpCounters;

/// Oracle access point that owns the run's counters. Every callback the
/// solver issues goes through here, so reported counters equal calls made.
pub(crate) struct Eval<'a, O: SmoothOracle> {
    pub problem: &'a CompositeProblem<O>,
    pub counters: OpCounters,
}

impl<'a, O: SmoothOracle> Eval<'a, O> {
    pub fn new(problem: &'a CompositeProblem<O>) -> Self {
        Self {
            problem,
            counters: OpCounters::default(),
        }
    }

    /// Full objective. Non-finite values are returned as-is so that line
    /// searches reject the trial point instead of aborting the run.
    pub fn phi(&mut self, x: &[f64]) -> f64 {
        self.counters.f_evals += 1;
        self.problem.oracle.value(x) + self.problem.lambda() * linalg::norm_l1(x)
    }

    pub fn grad(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.counters.grad_evals += 1;
        let g = self.problem.oracle.gradient(x);
        if !linalg::all_finite(&g) {
            return Err(Error::NonFinite {
                context: "gradient evaluation",
            });
        }
        Ok(g)
    }

    /// Proximal-gradient update at stepsize `t`.
    pub fn prox_point(&mut self, x: &[f64], grad: &[f64], t: f64) -> Vec<f64> {
        self.counters.prox_count += 1;
        crate::stationarity::prox_gradient_point(x, grad, t, self.problem.lambda())
    }

    /// Gradient mapping at stepsize `t` (one proximal evaluation).
    pub fn gradient_mapping(&mut self, x: &[f64], grad: &[f64], t: f64) -> Vec<f64> {
        let p = self.prox_point(x, grad, t);
        x.iter().zip(&p).map(|(xi, pi)| t * (xi - pi)).collect()
    }
}

/// Line-search result: accepted step, or a stall after the backtrack cap.
pub(crate) enum LsOutcome<T> {
    Accepted(T),
    Stalled,
}

pub(crate) struct ProxStep {
    pub x_next: Vec<f64>,
    pub phi_next: f64,
    pub t: f64,
    pub backtracks: usize,
    /// `||G_t(x)||` at the accepted stepsize; this exact value entered the
    /// sufficient-decrease test.
    pub norm_gt: f64,
}

/// Proximal-gradient backtracking: finds the smallest `j >= j_start` with
/// `phi(prox at t = beta^j) < phi(x) - (eta_bar / beta^j) ||G_{beta^j}(x)||^2`.
pub(crate) fn prox_line_search<O: SmoothOracle>(
    ev: &mut Eval<O>,
    x: &[f64],
    phi_x: f64,
    grad: &[f64],
    config: &SolverConfig,
    j_start: usize,
) -> Result<LsOutcome<ProxStep>> {
    for j in j_start..=(j_start + config.ls_max_backtracks) {
        let t = fmath::powi(config.beta, j as i32);
        if !t.is_finite() {
            break;
        }
        let x_trial = ev.prox_point(x, grad, t);
        let gt_norm = {
            let mut s = 0.0;
            for (xi, pi) in x.iter().zip(&x_trial) {
                let d = t * (xi - pi);
                s += d * d;
            }
            fmath::sqrt(s)
        };
        let phi_trial = ev.phi(&x_trial);
        if phi_trial < phi_x - (config.eta_bar / t) * gt_norm * gt_norm {
            return Ok(LsOutcome::Accepted(ProxStep {
                x_next: x_trial,
                phi_next: phi_trial,
                t,
                backtracks: j,
                norm_gt: gt_norm,
            }));
        }
    }
    Ok(LsOutcome::Stalled)
}

pub(crate) struct DirStep {
    pub x_next: Vec<f64>,
    pub phi_next: f64,
    pub step_size: f64,
    pub backtracks: usize,
}

/// Cubic-decrease backtracking along a fixed full-space direction:
/// `phi(x + theta^j dir) < phi(x) - eta_nc theta^{2j} norm_d^3`.
/// `norm_d` is the curvature-direction norm, not `||dir||` (the direction may
/// be pre-scaled by the scaling matrix).
pub(crate) fn cubic_line_search<O: SmoothOracle>(
    ev: &mut Eval<O>,
    x: &[f64],
    phi_x: f64,
    dir: &[f64],
    norm_d: f64,
    config: &SolverConfig,
) -> Result<LsOutcome<DirStep>> {
    let d3 = norm_d * norm_d * norm_d;
    let mut step = 1.0;
    for j in 0..=config.ls_max_backtracks {
        let x_trial: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + step * di).collect();
        let phi_trial = ev.phi(&x_trial);
        if phi_trial < phi_x - config.eta_nc * step * step * d3 {
            return Ok(LsOutcome::Accepted(DirStep {
                x_next: x_trial,
                phi_next: phi_trial,
                step_size: step,
                backtracks: j,
            }));
        }
        step *= config.theta_nc;
    }
    Ok(LsOutcome::Stalled)
}

/// Quadratic-decrease backtracking along a fixed direction:
/// `phi(x + theta^j dir) < phi(x) - eta_sol theta^{2j} eps_h norm_d^2`.
pub(crate) fn quadratic_line_search<O: SmoothOracle>(
    ev: &mut Eval<O>,
    x: &[f64],
    phi_x: f64,
    dir: &[f64],
    norm_d: f64,
    eps_h: f64,
    config: &SolverConfig,
) -> Result<LsOutcome<DirStep>> {
    let d2 = norm_d * norm_d;
    let mut step = 1.0;
    for j in 0..=config.ls_max_backtracks {
        let x_trial: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + step * di).collect();
        let phi_trial = ev.phi(&x_trial);
        if phi_trial < phi_x - config.eta_sol * step * step * eps_h * d2 {
            return Ok(LsOutcome::Accepted(DirStep {
                x_next: x_trial,
                phi_next: phi_trial,
                step_size: step,
                backtracks: j,
            }));
        }
        step *= config.theta_sol;
    }
    Ok(LsOutcome::Stalled)
}

/// What the shared second phase decided.
pub(crate) enum SecondPhase {
    /// Curvature certified above `-eps_h` (or the support was empty).
    Certified {
        support_size: usize,
        lambda_min: Option<f64>,
    },
    /// A curvature direction was found and a cubic-decrease step accepted.
    Stepped {
        x_next: Vec<f64>,
        phi_next: f64,
        step_size: f64,
        lambda_hat: f64,
        norm_d: f64,
    },
    Stalled,
}

/// Second phase common to both solvers: probe the scaled restricted Hessian
/// on the exact support with the minimum-eigenvalue oracle; on a certificate
/// stop, otherwise walk along the scaled curvature direction under the cubic
/// decrease rule.
pub(crate) fn second_phase<O: SmoothOracle, R: Rng>(
    ev: &mut Eval<O>,
    x: &[f64],
    phi_x: f64,
    grad: &[f64],
    config: &SolverConfig,
    rng: &mut R,
) -> Result<SecondPhase> {
    let part = partition(x, config.eps_g, config.sign_threshold);
    let support = part.i_neq0.len();
    if support == 0 {
        return Ok(SecondPhase::Certified {
            support_size: 0,
            lambda_min: None,
        });
    }
    let s = scaling(x, config.eps_g);
    let mut op = restricted_scaled_operator(ev.problem, x, &part.i_neq0, &s)?;
    let outcome = meo::meo(&mut op, config.eps_h, config.sigma, None, rng);
    ev.counters.hvp_count += op.applies();
    let (lambda_hat, u) = match outcome? {
        MeoOutcome::Certificate { .. } => {
            return Ok(SecondPhase::Certified {
                support_size: support,
                lambda_min: None,
            })
        }
        MeoOutcome::NegativeCurvature { lambda_hat, v, .. } => (lambda_hat, v),
    };

    // direction on the support: -sgn(g' S u) |u' S H S u| u, zero elsewhere
    let g = subgradient_residual_with_grad(x, grad, ev.problem.lambda(), config.sign_threshold);
    let mut inner = 0.0;
    for (k, &i) in part.i_neq0.iter().enumerate() {
        inner += g[i] * s[i] * u[k];
    }
    let factor = -fmath::sgn(inner) * lambda_hat.abs();
    let norm_d = lambda_hat.abs();

    // full-space direction already multiplied by the scaling matrix
    let mut dir = vec![0.0; x.len()];
    for (k, &i) in part.i_neq0.iter().enumerate() {
        dir[i] = s[i] * factor * u[k];
    }

    match cubic_line_search(ev, x, phi_x, &dir, norm_d, config)? {
        LsOutcome::Accepted(step) => Ok(SecondPhase::Stepped {
            x_next: step.x_next,
            phi_next: step.phi_next,
            step_size: step.step_size,
            lambda_hat,
            norm_d,
        }),
        LsOutcome::Stalled => Ok(SecondPhase::Stalled),
    }
}

pub(crate) fn check_start<O: SmoothOracle>(
    problem: &CompositeProblem<O>,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<()> {
    config.validate()?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            context: "solver start point",
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    if !linalg::all_finite(x0) {
        return Err(Error::NonFinite {
            context: "solver start point",
        });
    }
    Ok(())
}
