//! Operation counters, per-iteration trace records, solve reports, and the
//! post-run line-search validator.

use alloc::vec::Vec;

use crate::config::SolverConfig;
use crate::stationarity::StationarityCertificate;

/// Oracle-callback counters for one run. Monotone nondecreasing; solvers
/// count every callback they actually issue, including trace diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub grad_evals: usize,
    pub hvp_count: usize,
    pub prox_count: usize,
    pub f_evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    First,
    Second,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::First => "First",
            Phase::Second => "Second",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    ProxG,
    NewtonCgSol,
    NewtonCgNc,
    MeoNc,
    Terminated,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::ProxG => "ProxG",
            StepKind::NewtonCgSol => "NewtonCgSol",
            StepKind::NewtonCgNc => "NewtonCgNc",
            StepKind::MeoNc => "MeoNc",
            StepKind::Terminated => "Terminated",
        }
    }
}

/// One row per iteration. Measurements (`fval`, residual norms) are taken at
/// the iterate the step departs from; counters and wall time are snapshots at
/// the end of the iteration.
///
/// `norm_gt` is `||G_t(x)||` at the accepted proximal stepsize for `ProxG`
/// rows (that value enters the sufficient-decrease test) and at the
/// first-phase check stepsize otherwise. `norm_d` carries the direction norm
/// for Newton-CG and curvature steps so every line-search inequality can be
/// re-verified from the trace alone.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub iter: usize,
    pub phase: Phase,
    pub step_kind: StepKind,
    pub step_size: f64,
    pub fval: f64,
    pub norm_g: f64,
    pub norm_g_eps: f64,
    pub norm_gt: f64,
    pub norm_d: Option<f64>,
    pub lambda_min_estimate: Option<f64>,
    pub counters: OpCounters,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Stopped with a strong* second-order certificate.
    StrongStarSecondOrder,
    /// Stopped with a weak second-order certificate.
    WeakSecondOrder,
    MaxIters,
    LineSearchStall,
}

impl SolveStatus {
    pub fn is_certificate(&self) -> bool {
        matches!(
            self,
            SolveStatus::StrongStarSecondOrder | SolveStatus::WeakSecondOrder
        )
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub final_x: Vec<f64>,
    pub final_objective: f64,
    pub status: SolveStatus,
    pub certificate: Option<StationarityCertificate>,
    pub trace: Vec<IterationTrace>,
    pub counters: OpCounters,
    pub iterations: usize,
}

/// Wall clock that degrades to zero without `std`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stopwatch {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn elapsed_ms(&self) -> f64 {
        #[cfg(feature = "std")]
        {
            self.start.elapsed().as_secs_f64() * 1e3
        }
        #[cfg(not(feature = "std"))]
        {
            0.0
        }
    }
}

/// A violated trace contract, reported by [`validate_trace`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceViolation {
    #[error("row {row}: objective did not strictly decrease ({prev} -> {next})")]
    NotDecreasing { row: usize, prev: f64, next: f64 },
    #[error("row {row}: {kind} step violates its line-search inequality (lhs {lhs}, rhs {rhs})")]
    LineSearch {
        row: usize,
        kind: &'static str,
        lhs: f64,
        rhs: f64,
    },
    #[error("row {row}: missing {field} needed to check the step")]
    MissingField { row: usize, field: &'static str },
    #[error("row {row}: trace continues after a Terminated row")]
    AfterTermination { row: usize },
    #[error("row {row}: an operation counter decreased")]
    CounterRegression { row: usize },
}

/// Re-checks, from recorded data alone, that every step of a run satisfied
/// its exact sufficient-decrease inequality and that the objective decreased
/// strictly until termination.
pub fn validate_trace(
    trace: &[IterationTrace],
    config: &SolverConfig,
) -> core::result::Result<(), TraceViolation> {
    for w in trace.windows(2) {
        let (row, next) = (&w[0], &w[1]);
        let k = row.iter;
        if row.step_kind == StepKind::Terminated {
            return Err(TraceViolation::AfterTermination { row: k });
        }
        let (a, b) = (&row.counters, &next.counters);
        if b.grad_evals < a.grad_evals
            || b.hvp_count < a.hvp_count
            || b.prox_count < a.prox_count
            || b.f_evals < a.f_evals
        {
            return Err(TraceViolation::CounterRegression { row: k });
        }
        if !(next.fval < row.fval) {
            return Err(TraceViolation::NotDecreasing {
                row: k,
                prev: row.fval,
                next: next.fval,
            });
        }
        let (lhs, rhs, kind) = match row.step_kind {
            StepKind::ProxG => {
                let t = row.step_size;
                (
                    next.fval,
                    row.fval - (config.eta_bar / t) * row.norm_gt * row.norm_gt,
                    "ProxG",
                )
            }
            StepKind::MeoNc => {
                let d = match row.lambda_min_estimate {
                    Some(l) if l < 0.0 => -l,
                    _ => {
                        return Err(TraceViolation::MissingField {
                            row: k,
                            field: "lambda_min_estimate",
                        })
                    }
                };
                let s = row.step_size;
                (
                    next.fval,
                    row.fval - config.eta_nc * s * s * d * d * d,
                    "MeoNc",
                )
            }
            StepKind::NewtonCgSol | StepKind::NewtonCgNc => {
                let d = match row.norm_d {
                    Some(d) => d,
                    None => {
                        return Err(TraceViolation::MissingField {
                            row: k,
                            field: "norm_d",
                        })
                    }
                };
                let s = row.step_size;
                (
                    next.fval,
                    row.fval - config.eta_sol * s * s * config.eps_h * d * d,
                    "NewtonCg",
                )
            }
            StepKind::Terminated => unreachable!(),
        };
        if !(lhs < rhs) {
            return Err(TraceViolation::LineSearch {
                row: k,
                kind,
                lhs,
                rhs,
            });
        }
    }
    Ok(())
}
