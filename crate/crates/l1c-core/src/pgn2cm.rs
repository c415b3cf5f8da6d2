//! Proximal-gradient / Newton-CG solver with negative-curvature steps, plus
//! its first-phase-only variant.
//!
//! Each iteration classifies the iterate through the relaxed residual on the
//! thresholded partition:
//!
//! * some near-zero coordinate carries residual — proximal-gradient step;
//! * the support carries residual above `eps_g` — Newton-CG step on the
//!   restricted regularized Newton system via capped CG (approximate solution
//!   or rescaled curvature direction, both under a quadratic decrease rule);
//! * otherwise the iterate is a weak first-order point — probe the scaled
//!   restricted Hessian as in the hybrid solver and either stop with a weak
//!   second-order certificate or take a cubic-decrease curvature step.

use alloc::vec;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::capped_cg::{capped_cg, CappedCgParams, DirectionKind, KappaRule};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fmath;
use crate::hpgncm::{FirstPhaseReport, FirstPhaseStop};
use crate::linalg::{self, SymOp};
use crate::oracle::{CompositeProblem, SmoothOracle};
use crate::solver_util::{
    check_start, prox_line_search, quadratic_line_search, second_phase, Eval, LsOutcome,
    SecondPhase,
};
use crate::stationarity::{
    partition, relaxed_residual_with_grad, restricted_operator, subgradient_residual_with_grad,
    IndexPartition, StationarityCertificate,
};
use crate::trace::{IterationTrace, Phase, SolveReport, SolveStatus, StepKind, Stopwatch};

/// Which action the current iterate calls for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseChoice {
    ProxGrad,
    NewtonCg,
    SecondPhase,
}

/// Relative tolerance standing in for exact "nonzero residual" tests.
fn residual_floor(grad: &[f64]) -> f64 {
    1e-14 * (1.0 + linalg::norm(grad))
}

fn restricted_norm(v: &[f64], idx: &[usize]) -> f64 {
    fmath::sqrt(idx.iter().map(|&i| v[i] * v[i]).sum())
}

/// Classifies the iterate. Exposed standalone; evaluates one gradient.
pub fn pgn2cm_phase_select<O: SmoothOracle>(
    problem: &CompositeProblem<O>,
    x: &[f64],
    eps_g: f64,
) -> Result<PhaseChoice> {
    let grad = problem.oracle.gradient(x);
    if !linalg::all_finite(&grad) {
        return Err(Error::NonFinite {
            context: "pgn2cm_phase_select gradient",
        });
    }
    let geps = relaxed_residual_with_grad(x, &grad, problem.lambda(), eps_g);
    let part = partition(x, eps_g, crate::stationarity::SIGN_THRESHOLD_DEFAULT);
    Ok(select(&part, &geps, &grad, eps_g))
}

fn select(part: &IndexPartition, geps: &[f64], grad: &[f64], eps_g: f64) -> PhaseChoice {
    let floor = residual_floor(grad);
    if !part.ie_zero.is_empty() && restricted_norm(geps, &part.ie_zero) > floor {
        PhaseChoice::ProxGrad
    } else if !part.ie_neq0.is_empty() && restricted_norm(geps, &part.ie_neq0) > eps_g {
        PhaseChoice::NewtonCg
    } else {
        PhaseChoice::SecondPhase
    }
}

/// Post-hoc contract flags for one Newton-CG step.
#[derive(Debug, Clone)]
pub struct NewtonCgStepRecord {
    pub d_type: DirectionKind,
    /// Full-space direction (zero off the thresholded support).
    pub d: Vec<f64>,
    pub tau_k: f64,
    /// Accepted backtracking exponent.
    pub j_k: usize,
    pub step_size: f64,
    pub norm_d: f64,
    /// Rayleigh quotient of the unshifted restricted Hessian along the
    /// curvature direction (`NC` only).
    pub rayleigh: Option<f64>,
    /// `d' (H + shift) d >= eps_h ||d||^2` (`SOL`).
    pub sol_curvature_ok: bool,
    /// `||d|| <= 1.1 ||g|| / eps_h` (`SOL`).
    pub sol_norm_ok: bool,
    /// `||residual|| <= (eps_h zeta / 2) ||d||` (`SOL`).
    pub sol_residual_ok: bool,
    /// `d' g <= 0` and `||d|| >= eps_h` (`NC`).
    pub nc_contract_ok: bool,
    /// Shift within `[2 eps_h, 2 tau_hat eps_h]`; only meaningful (and only
    /// asserted) when `||g|| <= 1`, where the experimental tau rule lands on
    /// the interval's lower end.
    pub tau_interval_ok: bool,
}

struct NewtonOutcome {
    x_next: Vec<f64>,
    phi_next: f64,
    record: NewtonCgStepRecord,
}

enum NewtonResult {
    Stepped(NewtonOutcome),
    Stalled { norm_d: f64 },
}

/// Regularization strength for the restricted Newton system: the
/// experimental rule `2 eps_h / min(1, ||g||^delta)`, which keeps the shift
/// pinned to `2 eps_h` once the residual drops below one.
fn tau_rule(eps_h: f64, norm_g: f64, delta: f64) -> f64 {
    2.0 * eps_h / fmath::powf(norm_g, delta).min(1.0)
}

#[allow(clippy::too_many_arguments)]
fn newton_cg_step_inner<O: SmoothOracle>(
    ev: &mut Eval<O>,
    x: &[f64],
    phi_x: f64,
    geps: &[f64],
    part: &IndexPartition,
    eps_h: f64,
    tau_k: f64,
    kappa_rule: KappaRule,
    config: &SolverConfig,
) -> Result<NewtonResult> {
    let idx = &part.ie_neq0;
    let g_sub: Vec<f64> = idx.iter().map(|&i| geps[i]).collect();
    let norm_g_sub = linalg::norm(&g_sub);

    let mut op = restricted_operator(ev.problem, x, idx)?;
    let out = capped_cg(
        &mut op,
        &g_sub,
        &CappedCgParams {
            eps: eps_h,
            zeta: config.zeta,
            delta: config.delta,
            tau_bar: tau_k,
            m_init: 0.0,
            kappa_rule,
        },
    );
    ev.counters.hvp_count += op.applies();
    let out = out?;

    let shift = out.shift;
    let tau_interval_ok = if norm_g_sub <= 1.0 {
        shift >= 2.0 * eps_h * (1.0 - 1e-9) && shift <= 2.0 * config.tau_hat * eps_h * (1.0 + 1e-9)
    } else {
        true // outside the asserted regime; recorded only
    };

    let (d_sub, norm_d, rayleigh, step_kind_flags) = match out.kind {
        DirectionKind::Sol => {
            let norm_d = linalg::norm(&out.d);
            let sol_curvature_ok = out.quad_form >= eps_h * norm_d * norm_d * (1.0 - 1e-9);
            let sol_norm_ok = norm_d <= 1.1 / eps_h * norm_g_sub * (1.0 + 1e-9);
            let sol_residual_ok = out
                .residual
                .as_ref()
                .map(|r| linalg::norm(r) <= 0.5 * eps_h * config.zeta * norm_d * (1.0 + 1e-9))
                .unwrap_or(false);
            (
                out.d,
                norm_d,
                None,
                (sol_curvature_ok, sol_norm_ok, sol_residual_ok, true),
            )
        }
        DirectionKind::Nc => {
            let nd = linalg::norm(&out.d);
            let nd2 = nd * nd;
            // Rayleigh quotient of the unshifted restriction
            let rayleigh = (out.quad_form - shift * nd2) / nd2;
            let inner = linalg::dot(&out.d, &g_sub);
            let factor = -fmath::sgn(inner) * rayleigh.abs() / nd;
            let d_sub = linalg::scaled(&out.d, factor);
            let norm_d = rayleigh.abs();
            let nc_contract_ok = linalg::dot(&d_sub, &g_sub) <= 1e-12 * (1.0 + norm_g_sub * norm_d)
                && norm_d >= eps_h * (1.0 - 1e-9)
                && rayleigh < 0.0;
            (
                d_sub,
                norm_d,
                Some(rayleigh),
                (true, true, true, nc_contract_ok),
            )
        }
    };
    let (sol_curvature_ok, sol_norm_ok, sol_residual_ok, nc_contract_ok) = step_kind_flags;

    let mut dir = vec![0.0; x.len()];
    for (k, &i) in idx.iter().enumerate() {
        dir[i] = d_sub[k];
    }

    match quadratic_line_search(ev, x, phi_x, &dir, norm_d, eps_h, config)? {
        LsOutcome::Accepted(step) => Ok(NewtonResult::Stepped(NewtonOutcome {
            x_next: step.x_next,
            phi_next: step.phi_next,
            record: NewtonCgStepRecord {
                d_type: out.kind,
                d: dir,
                tau_k,
                j_k: step.backtracks,
                step_size: step.step_size,
                norm_d,
                rayleigh,
                sol_curvature_ok,
                sol_norm_ok,
                sol_residual_ok,
                nc_contract_ok,
                tau_interval_ok,
            },
        })),
        LsOutcome::Stalled => Ok(NewtonResult::Stalled { norm_d }),
    }
}

/// One Newton-CG step, exposed standalone: requires the iterate to be in the
/// Newton-CG phase. Evaluates its own gradient and objective.
pub fn newton_cg_step<O: SmoothOracle>(
    problem: &CompositeProblem<O>,
    x: &[f64],
    config: &SolverConfig,
) -> Result<(Vec<f64>, NewtonCgStepRecord)> {
    config.validate()?;
    let mut ev = Eval::new(problem);
    let grad = ev.grad(x)?;
    let phi_x = ev.phi(x);
    if !phi_x.is_finite() {
        return Err(Error::NonFinite {
            context: "newton_cg_step objective",
        });
    }
    let geps = relaxed_residual_with_grad(x, &grad, problem.lambda(), config.eps_g);
    let part = partition(x, config.eps_g, config.sign_threshold);
    if select(&part, &geps, &grad, config.eps_g) != PhaseChoice::NewtonCg {
        return Err(Error::InvalidConfig(
            "newton_cg_step requires the Newton-CG phase".into(),
        ));
    }
    let norm_g_sub = restricted_norm(&geps, &part.ie_neq0);
    let tau_k = tau_rule(config.eps_h, norm_g_sub, config.delta);
    match newton_cg_step_inner(
        &mut ev,
        x,
        phi_x,
        &geps,
        &part,
        config.eps_h,
        tau_k,
        KappaRule::Standard,
        config,
    )? {
        NewtonResult::Stepped(outcome) => Ok((outcome.x_next, outcome.record)),
        NewtonResult::Stalled { .. } => Err(Error::InvalidConfig(alloc::format!(
            "Newton-CG line search stalled after {} backtracks",
            config.ls_max_backtracks
        ))),
    }
}

/// Runs the proximal-gradient / Newton-CG solver from `x0`.
pub fn pgn2cm_solve<O: SmoothOracle>(
    problem: &CompositeProblem<O>,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolveReport> {
    check_start(problem, x0, config)?;
    let sw = Stopwatch::start();
    let mut rng = ChaCha20Rng::seed_from_u64(config.rng_seed);
    let mut ev = Eval::new(problem);
    let lambda = problem.lambda();

    let mut x = x0.to_vec();
    let mut grad = ev.grad(&x)?;
    let mut phi = ev.phi(&x);
    if !phi.is_finite() {
        return Err(Error::NonFinite {
            context: "objective at start point",
        });
    }
    let mut trace: Vec<IterationTrace> = Vec::new();
    let mut status = SolveStatus::MaxIters;
    let mut certificate: Option<StationarityCertificate> = None;
    let mut last_phase = Phase::First;

    let mut iter = 0usize;
    while iter < config.max_iters {
        let g = subgradient_residual_with_grad(&x, &grad, lambda, config.sign_threshold);
        let norm_g = linalg::norm(&g);
        let geps = relaxed_residual_with_grad(&x, &grad, lambda, config.eps_g);
        let norm_geps = linalg::norm(&geps);
        let part = partition(&x, config.eps_g, config.sign_threshold);
        let gt = ev.gradient_mapping(&x, &grad, 1.0);
        let norm_gt = linalg::norm(&gt);

        let choice = select(&part, &geps, &grad, config.eps_g);
        match choice {
            PhaseChoice::ProxGrad => {
                last_phase = Phase::First;
                match prox_line_search(&mut ev, &x, phi, &grad, config, 0)? {
                    LsOutcome::Accepted(step) => {
                        trace.push(IterationTrace {
                            iter,
                            phase: Phase::First,
                            step_kind: StepKind::ProxG,
                            step_size: step.t,
                            fval: phi,
                            norm_g,
                            norm_g_eps: norm_geps,
                            norm_gt: step.norm_gt,
                            norm_d: None,
                            lambda_min_estimate: None,
                            counters: ev.counters,
                            wall_ms: sw.elapsed_ms(),
                        });
                        x = step.x_next;
                        phi = step.phi_next;
                        grad = ev.grad(&x)?;
                    }
                    LsOutcome::Stalled => {
                        status = SolveStatus::LineSearchStall;
                        break;
                    }
                }
            }
            PhaseChoice::NewtonCg => {
                last_phase = Phase::First;
                let norm_g_sub = restricted_norm(&geps, &part.ie_neq0);
                let tau_k = tau_rule(config.eps_h, norm_g_sub, config.delta);
                match newton_cg_step_inner(
                    &mut ev,
                    &x,
                    phi,
                    &geps,
                    &part,
                    config.eps_h,
                    tau_k,
                    KappaRule::Standard,
                    config,
                )? {
                    NewtonResult::Stepped(outcome) => {
                        let kind = match outcome.record.d_type {
                            DirectionKind::Sol => StepKind::NewtonCgSol,
                            DirectionKind::Nc => StepKind::NewtonCgNc,
                        };
                        trace.push(IterationTrace {
                            iter,
                            phase: Phase::First,
                            step_kind: kind,
                            step_size: outcome.record.step_size,
                            fval: phi,
                            norm_g,
                            norm_g_eps: norm_geps,
                            norm_gt,
                            norm_d: Some(outcome.record.norm_d),
                            lambda_min_estimate: outcome.record.rayleigh,
                            counters: ev.counters,
                            wall_ms: sw.elapsed_ms(),
                        });
                        x = outcome.x_next;
                        phi = outcome.phi_next;
                        grad = ev.grad(&x)?;
                    }
                    NewtonResult::Stalled { .. } => {
                        status = SolveStatus::LineSearchStall;
                        break;
                    }
                }
            }
            PhaseChoice::SecondPhase => {
                last_phase = Phase::Second;
                match second_phase(&mut ev, &x, phi, &grad, config, &mut rng)? {
                    SecondPhase::Certified {
                        support_size,
                        lambda_min,
                    } => {
                        status = SolveStatus::WeakSecondOrder;
                        certificate = Some(StationarityCertificate {
                            first_order: true,
                            second_order: Some(true),
                            residual_norm: norm_geps,
                            t: None,
                            lambda_min,
                            sigma: if support_size == 0 {
                                None
                            } else {
                                Some(config.sigma)
                            },
                            support_size,
                        });
                        break;
                    }
                    SecondPhase::Stepped {
                        x_next,
                        phi_next,
                        step_size,
                        lambda_hat,
                        norm_d,
                    } => {
                        trace.push(IterationTrace {
                            iter,
                            phase: Phase::Second,
                            step_kind: StepKind::MeoNc,
                            step_size,
                            fval: phi,
                            norm_g,
                            norm_g_eps: norm_geps,
                            norm_gt,
                            norm_d: Some(norm_d),
                            lambda_min_estimate: Some(lambda_hat),
                            counters: ev.counters,
                            wall_ms: sw.elapsed_ms(),
                        });
                        x = x_next;
                        phi = phi_next;
                        grad = ev.grad(&x)?;
                    }
                    SecondPhase::Stalled => {
                        status = SolveStatus::LineSearchStall;
                        break;
                    }
                }
            }
        }
        iter += 1;
    }

    let norm_g = linalg::norm(&subgradient_residual_with_grad(
        &x,
        &grad,
        lambda,
        config.sign_threshold,
    ));
    let norm_geps = linalg::norm(&relaxed_residual_with_grad(&x, &grad, lambda, config.eps_g));
    let gt = ev.gradient_mapping(&x, &grad, 1.0);
    trace.push(IterationTrace {
        iter,
        phase: if status == SolveStatus::WeakSecondOrder {
            Phase::Second
        } else {
            last_phase
        },
        step_kind: StepKind::Terminated,
        step_size: 0.0,
        fval: phi,
        norm_g,
        norm_g_eps: norm_geps,
        norm_gt: linalg::norm(&gt),
        norm_d: None,
        lambda_min_estimate: None,
        counters: ev.counters,
        wall_ms: sw.elapsed_ms(),
    });

    Ok(SolveReport {
        final_x: x,
        final_objective: phi,
        status,
        certificate,
        counters: ev.counters,
        iterations: iter,
        trace,
    })
}

/// Curvature assumption for the first-phase-only variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityMode {
    /// Residual-scaled regularization with `eps_h = sqrt(eps_g)`.
    Nonconvex,
    /// Fixed regularization `tau * sqrt(eps_g)` with the residual-scaled
    /// condition-number rule inside capped CG.
    Convex,
}

/// First-phase-only variant: the Newton-CG gate relaxes from
/// `||g_eps|| > eps_g` to "nonzero", and the curvature machinery is removed.
/// Runs until the relaxed residual is numerically zero or `max_iters`.
pub fn fpgn2cm_solve<O: SmoothOracle>(
    problem: &CompositeProblem<O>,
    x0: &[f64],
    config: &SolverConfig,
    mode: ConvexityMode,
    max_iters: usize,
) -> Result<FirstPhaseReport> {
    check_start(problem, x0, config)?;
    let sw = Stopwatch::start();
    let mut ev = Eval::new(problem);
    let lambda = problem.lambda();
    // first-phase theory ties the regularization level to sqrt(eps_g)
    let mut cfg = config.clone();
    cfg.eps_h = fmath::sqrt(cfg.eps_g);
    let eps_h = cfg.eps_h;

    let mut x = x0.to_vec();
    let mut grad = ev.grad(&x)?;
    let mut phi = ev.phi(&x);
    if !phi.is_finite() {
        return Err(Error::NonFinite {
            context: "objective at start point",
        });
    }
    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    let mut stop = FirstPhaseStop::BudgetExhausted;

    let mut iter = 0usize;
    while iter < max_iters {
        let g = subgradient_residual_with_grad(&x, &grad, lambda, cfg.sign_threshold);
        let norm_g = linalg::norm(&g);
        let geps = relaxed_residual_with_grad(&x, &grad, lambda, cfg.eps_g);
        let norm_geps = linalg::norm(&geps);
        let part = partition(&x, cfg.eps_g, cfg.sign_threshold);
        let gt = ev.gradient_mapping(&x, &grad, 1.0);
        let norm_gt = linalg::norm(&gt);
        let floor = residual_floor(&grad);

        let prox_branch = !part.ie_zero.is_empty() && restricted_norm(&geps, &part.ie_zero) > floor;
        let newton_branch = !prox_branch
            && !part.ie_neq0.is_empty()
            && restricted_norm(&geps, &part.ie_neq0) > floor;

        // once the sufficient decrease demanded at the unit step drops below
        // the floating-point resolution of phi, the strict-decrease test has
        // no meaning left and the run has converged for rate purposes
        let phi_resolution = 64.0 * f64::EPSILON * (1.0 + phi.abs());

        if prox_branch {
            match prox_line_search(&mut ev, &x, phi, &grad, &cfg, 0)? {
                LsOutcome::Accepted(step) => {
                    trace.push(IterationTrace {
                        iter,
                        phase: Phase::First,
                        step_kind: StepKind::ProxG,
                        step_size: step.t,
                        fval: phi,
                        norm_g,
                        norm_g_eps: norm_geps,
                        norm_gt: step.norm_gt,
                        norm_d: None,
                        lambda_min_estimate: None,
                        counters: ev.counters,
                        wall_ms: sw.elapsed_ms(),
                    });
                    iterates.push(x.clone());
                    x = step.x_next;
                    phi = step.phi_next;
                    grad = ev.grad(&x)?;
                }
                LsOutcome::Stalled => {
                    let g1 = ev.gradient_mapping(&x, &grad, 1.0);
                    let required = cfg.eta_bar * linalg::dot(&g1, &g1);
                    stop = if required <= phi_resolution {
                        FirstPhaseStop::ResidualNegligible
                    } else {
                        FirstPhaseStop::LineSearchStall
                    };
                    break;
                }
            }
        } else if newton_branch {
            let norm_g_sub = restricted_norm(&geps, &part.ie_neq0);
            let (tau_k, rule) = match mode {
                ConvexityMode::Nonconvex => {
                    (tau_rule(eps_h, norm_g_sub, cfg.delta), KappaRule::Standard)
                }
                ConvexityMode::Convex => {
                    let tau = if cfg.tau_hat > 1.0 { cfg.tau_hat } else { 2.0 };
                    (tau * fmath::sqrt(cfg.eps_g), KappaRule::GradientScaled)
                }
            };
            match newton_cg_step_inner(&mut ev, &x, phi, &geps, &part, eps_h, tau_k, rule, &cfg)? {
                NewtonResult::Stepped(outcome) => {
                    let kind = match outcome.record.d_type {
                        DirectionKind::Sol => StepKind::NewtonCgSol,
                        DirectionKind::Nc => StepKind::NewtonCgNc,
                    };
                    trace.push(IterationTrace {
                        iter,
                        phase: Phase::First,
                        step_kind: kind,
                        step_size: outcome.record.step_size,
                        fval: phi,
                        norm_g,
                        norm_g_eps: norm_geps,
                        norm_gt,
                        norm_d: Some(outcome.record.norm_d),
                        lambda_min_estimate: outcome.record.rayleigh,
                        counters: ev.counters,
                        wall_ms: sw.elapsed_ms(),
                    });
                    iterates.push(x.clone());
                    x = outcome.x_next;
                    phi = outcome.phi_next;
                    grad = ev.grad(&x)?;
                }
                NewtonResult::Stalled { norm_d } => {
                    let required = cfg.eta_sol * eps_h * norm_d * norm_d;
                    stop = if required <= phi_resolution {
                        FirstPhaseStop::ResidualNegligible
                    } else {
                        FirstPhaseStop::LineSearchStall
                    };
                    break;
                }
            }
        } else {
            stop = FirstPhaseStop::ResidualNegligible;
            break;
        }
        iter += 1;
    }

    let norm_g = linalg::norm(&subgradient_residual_with_grad(
        &x,
        &grad,
        lambda,
        cfg.sign_threshold,
    ));
    let norm_geps = linalg::norm(&relaxed_residual_with_grad(&x, &grad, lambda, cfg.eps_g));
    let gt = ev.gradient_mapping(&x, &grad, 1.0);
    trace.push(IterationTrace {
        iter,
        phase: Phase::First,
        step_kind: StepKind::Terminated,
        step_size: 0.0,
        fval: phi,
        norm_g,
        norm_g_eps: norm_geps,
        norm_gt: linalg::norm(&gt),
        norm_d: None,
        lambda_min_estimate: None,
        counters: ev.counters,
        wall_ms: sw.elapsed_ms(),
    });
    iterates.push(x.clone());

    Ok(FirstPhaseReport {
        trace,
        iterates,
        final_x: x,
        final_objective: phi,
        counters: ev.counters,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMat;
    use crate::meo;
    use crate::trace::validate_trace;

    struct Quad {
        q: DenseMat,
        c: Vec<f64>,
    }

    impl SmoothOracle for Quad {
        fn dim(&self) -> usize {
            self.c.len()
        }
        fn value(&self, x: &[f64]) -> f64 {
            let d = linalg::sub(x, &self.c);
            0.5 * linalg::dot(&d, &self.q.matvec(&d))
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            self.q.matvec(&linalg::sub(x, &self.c))
        }
        fn hess_vec(&self, _x: &[f64], v: &[f64]) -> Vec<f64> {
            self.q.matvec(v)
        }
        fn dense_hessian(&self, _x: &[f64]) -> Option<DenseMat> {
            Some(self.q.clone())
        }
    }

    fn quad(q: DenseMat, c: Vec<f64>, lambda: f64) -> CompositeProblem<Quad> {
        CompositeProblem::new(Quad { q, c }, lambda).unwrap()
    }

    #[test]
    fn phase_select_examples() {
        // a coordinate inside the threshold band with residual outside the
        // relaxed band forces the proximal branch
        let p = quad(DenseMat::identity(2), vec![5.0, 1.0], 0.1);
        let choice = pgn2cm_phase_select(&p, &[0.0, 0.9], 1e-2).unwrap();
        assert_eq!(choice, PhaseChoice::ProxGrad);

        // support-only residual above eps_g: Newton-CG branch
        let choice = pgn2cm_phase_select(&p, &[4.0, 1.0], 1e-2).unwrap();
        assert_eq!(choice, PhaseChoice::NewtonCg);

        // near-stationary point: second phase
        let xstar = [4.9, 0.9];
        let choice = pgn2cm_phase_select(&p, &xstar, 1e-2).unwrap();
        assert_eq!(choice, PhaseChoice::SecondPhase);
    }

    #[test]
    fn newton_step_on_spd_block_is_sol() {
        let q = DenseMat::diag(&[2.0, 1.0]);
        let p = quad(q.clone(), vec![3.0, 4.0], 0.01);
        let mut config = SolverConfig::new(1e-4);
        config.eps_h = 1e-2;
        let x = [1.0, 2.0];
        let (x_next, record) = newton_cg_step(&p, &x, &config).unwrap();
        assert_eq!(record.d_type, DirectionKind::Sol);
        assert!(record.sol_curvature_ok && record.sol_norm_ok && record.sol_residual_ok);
        assert!(record.tau_interval_ok);
        // direction approximately solves (H + shift) d = -g_eps
        let grad = p.oracle.gradient(&x);
        let geps = relaxed_residual_with_grad(&x, &grad, p.lambda(), config.eps_g);
        let shift = record.tau_k * linalg::norm(&geps).powf(config.delta);
        for (i, gi) in geps.iter().enumerate() {
            let hd: f64 = (0..2).map(|j| q.get(i, j) * record.d[j]).sum();
            let lhs = hd + shift * record.d[i];
            assert!((lhs + gi).abs() < 0.5 * config.eps_h * config.zeta * record.norm_d + 1e-9);
        }
        assert!(p.objective(&x_next) < p.objective(&x));
    }

    #[test]
    fn newton_step_with_planted_negative_eigenvalue_is_nc() {
        // block has eigenvalue -1; stay in the Newton phase with a large
        // residual on the support
        let q = DenseMat::diag(&[-1.0, 3.0]);
        let p = quad(q, vec![0.5, 2.0], 0.01);
        let mut config = SolverConfig::new(1e-4);
        config.eps_h = 0.1;
        let x = [2.0, 3.0];
        assert_eq!(
            pgn2cm_phase_select(&p, &x, config.eps_g).unwrap(),
            PhaseChoice::NewtonCg
        );
        let (_, record) = newton_cg_step(&p, &x, &config).unwrap();
        assert_eq!(record.d_type, DirectionKind::Nc);
        assert!(record.nc_contract_ok);
        let r = record.rayleigh.unwrap();
        assert!(r < 0.0 && (record.norm_d - r.abs()).abs() < 1e-12);
        assert!(record.norm_d >= config.eps_h);
    }

    #[test]
    fn solve_certifies_weak_point_on_convex_instance() {
        let p = quad(DenseMat::diag(&[1.5, 0.5, 1.0]), vec![2.0, -3.0, 0.0], 0.1);
        let mut config = SolverConfig::new(1e-6);
        config.rng_seed = 3;
        let report = pgn2cm_solve(&p, &[1.0, 1.0, 1.0], &config).unwrap();
        assert_eq!(report.status, SolveStatus::WeakSecondOrder);
        validate_trace(&report.trace, &config).unwrap();
        let cert = report.certificate.unwrap();
        assert!(cert.first_order);
        assert_eq!(cert.second_order, Some(true));
        // re-check the certificate independently
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(99);
        let (ok, _) = crate::stationarity::is_weak_second_order(
            &p,
            &report.final_x,
            config.eps_g,
            config.eps_h,
            crate::stationarity::CurvatureProbe::Dense,
            &mut rng,
        )
        .unwrap();
        assert!(ok);
    }

    #[test]
    fn weak_point_start_is_certified_immediately() {
        let p = quad(DenseMat::identity(2), vec![2.0, 0.0], 0.1);
        // minimizer: (1.9, 0)
        let mut config = SolverConfig::new(1e-4);
        config.rng_seed = 5;
        let report = pgn2cm_solve(&p, &[1.9, 0.0], &config).unwrap();
        assert_eq!(report.status, SolveStatus::WeakSecondOrder);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn fpgn2cm_superlinear_on_strongly_convex_quadratic() {
        let q = DenseMat::diag(&[2.0, 1.0, 0.5, 3.0]);
        let p = quad(q, vec![1.0, -2.0, 3.0, -0.5], 0.05);
        let config = SolverConfig::new(1e-8);
        let report = fpgn2cm_solve(&p, &[0.0; 4], &config, ConvexityMode::Convex, 60).unwrap();
        assert_eq!(report.stop, FirstPhaseStop::ResidualNegligible);
        // every Newton step on an SPD block must be an approximate solution
        assert!(report
            .trace
            .iter()
            .all(|r| r.step_kind != StepKind::NewtonCgNc));
        // residual collapses fast: few iterations to numerical zero
        assert!(report.trace.len() < 30, "{}", report.trace.len());

        let nonconvex =
            fpgn2cm_solve(&p, &[0.0; 4], &config, ConvexityMode::Nonconvex, 60).unwrap();
        assert_eq!(nonconvex.stop, FirstPhaseStop::ResidualNegligible);
    }

    #[test]
    fn fpgn2cm_start_at_solution_has_unit_trace() {
        let p = quad(DenseMat::identity(1), vec![2.0], 0.1);
        let config = SolverConfig::new(1e-6);
        let report = fpgn2cm_solve(&p, &[1.9], &config, ConvexityMode::Nonconvex, 50).unwrap();
        assert_eq!(report.stop, FirstPhaseStop::ResidualNegligible);
        assert_eq!(report.trace.len(), 1);
    }

    #[test]
    fn counters_match_counting_oracle() {
        use crate::oracle::CountingOracle;
        let inner = Quad {
            q: DenseMat::diag(&[1.5, 0.5]),
            c: vec![2.0, -1.0],
        };
        let problem = CompositeProblem::new(CountingOracle::new(inner), 0.1).unwrap();
        let mut config = SolverConfig::new(1e-5);
        config.rng_seed = 17;
        let report = pgn2cm_solve(&problem, &[0.3, 0.4], &config).unwrap();
        assert_eq!(report.counters.f_evals, problem.oracle.value_calls());
        assert_eq!(report.counters.grad_evals, problem.oracle.gradient_calls());
        assert_eq!(report.counters.hvp_count, problem.oracle.hess_vec_calls());
    }

    #[test]
    fn unit_sol_steps_shrink_the_threshold_partition() {
        // across accepted unit-step solution directions that preserve the
        // signs of the thresholded support, the positive and negative
        // threshold sets can only shrink
        use crate::hpgncm::prox_grad_step;
        use crate::stationarity::SIGN_THRESHOLD_DEFAULT;

        let q = DenseMat::diag(&[1.2, 0.8, 1.5, 0.6]);
        let p = quad(q, vec![2.0, -1.5, 0.4, -0.2], 0.05);
        let mut config = SolverConfig::new(1e-4);
        config.rng_seed = 2;
        let mut x = vec![0.6, -0.4, 0.9, -0.7];
        let mut checked = 0;
        for _ in 0..50 {
            match pgn2cm_phase_select(&p, &x, config.eps_g).unwrap() {
                PhaseChoice::ProxGrad => {
                    x = prox_grad_step(&p, &x, &config).unwrap().x_next;
                }
                PhaseChoice::NewtonCg => {
                    let before = partition(&x, config.eps_g, SIGN_THRESHOLD_DEFAULT);
                    let (x_next, record) = newton_cg_step(&p, &x, &config).unwrap();
                    let unit = record.step_size == 1.0;
                    let signs_kept = before.ie_plus.iter().all(|&i| x[i] + record.d[i] > 0.0)
                        && before.ie_minus.iter().all(|&i| x[i] + record.d[i] < 0.0);
                    if record.d_type == DirectionKind::Sol && unit && signs_kept {
                        let after = partition(&x_next, config.eps_g, SIGN_THRESHOLD_DEFAULT);
                        for i in &after.ie_plus {
                            assert!(before.ie_plus.contains(i), "threshold set grew at {i}");
                        }
                        for i in &after.ie_minus {
                            assert!(before.ie_minus.contains(i), "threshold set grew at {i}");
                        }
                        checked += 1;
                    }
                    x = x_next;
                }
                PhaseChoice::SecondPhase => break,
            }
        }
        assert!(checked > 0, "no unit solution step qualified");
    }

    #[test]
    fn second_phase_implies_weak_first_order() {
        // branch exclusivity: when the second phase is selected the relaxed
        // residual norm is at most eps_g
        let p = quad(DenseMat::diag(&[1.0, 2.0]), vec![3.0, -1.0], 0.2);
        let mut config = SolverConfig::new(1e-5);
        config.rng_seed = 23;
        let report = pgn2cm_solve(&p, &[0.1, -0.2], &config).unwrap();
        assert_eq!(report.status, SolveStatus::WeakSecondOrder);
        let cert = report.certificate.unwrap();
        assert!(cert.residual_norm <= config.eps_g * (1.0 + 1e-12));
        let _ = meo::dense_min_eigpair(&mut crate::linalg::DenseOp::new(DenseMat::diag(&[
            1.0, 2.0,
        ])))
        .unwrap();
    }
}
