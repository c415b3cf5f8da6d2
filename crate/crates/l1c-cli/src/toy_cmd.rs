//! `l1c toy`: both solvers escape the toy instance's saddle-like stationary
//! point, plus first-phase convergence-rate traces.

use clap::Args;
use serde::Serialize;

use l1c_core::hpgncm::{fpgncm_solve, hpgncm_solve, FirstPhaseReport, FirstPhaseStop};
use l1c_core::linalg;
use l1c_core::pgn2cm::{fpgn2cm_solve, pgn2cm_solve, ConvexityMode};
use l1c_core::problems::toy::{
    toy_hpgncm_config, toy_known_points, toy_pgn2cm_config, toy_problem, RATE_STUDY_START, TOY_SEED,
};
use l1c_core::trace::validate_trace;
use l1c_core::SolveReport;

use crate::output::{rate_csv, trace_csv, write_file, write_json};
use crate::{CommonArgs, SolverSel};

#[derive(Args, Debug)]
pub struct ToyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Iteration budget for the first-phase rate traces.
    #[arg(long, default_value_t = 1000)]
    pub rate_iters: usize,
}

#[derive(Serialize)]
struct ToySolverSummary {
    algorithm: String,
    status: String,
    certified: bool,
    iterations: usize,
    final_x: Vec<f64>,
    final_objective: f64,
    dist_to_optimum: f64,
    norm_g: f64,
    hvp_count: usize,
    grad_evals: usize,
    f_evals: usize,
    trace_validated: bool,
}

#[derive(Serialize)]
struct ToyRateSummary {
    algorithm: String,
    stop: String,
    iterations: usize,
    final_x: Vec<f64>,
    dist_to_xbar: f64,
}

#[derive(Serialize)]
struct ToySummary {
    eps_g: f64,
    eps_h: f64,
    seed: u64,
    start: Vec<f64>,
    rate_start: Vec<f64>,
    solvers: Vec<ToySolverSummary>,
    rate_runs: Vec<ToyRateSummary>,
}

fn summarize(
    name: &str,
    report: &SolveReport,
    optimum: &[f64],
    config: &l1c_core::SolverConfig,
) -> ToySolverSummary {
    let problem = toy_problem();
    let g = l1c_core::stationarity::subgradient_residual(&problem, &report.final_x);
    ToySolverSummary {
        algorithm: name.to_string(),
        status: format!("{:?}", report.status),
        certified: report.status.is_certificate(),
        iterations: report.iterations,
        final_x: report.final_x.clone(),
        final_objective: report.final_objective,
        dist_to_optimum: linalg::norm(&linalg::sub(&report.final_x, optimum)),
        norm_g: linalg::norm(&g),
        hvp_count: report.counters.hvp_count,
        grad_evals: report.counters.grad_evals,
        f_evals: report.counters.f_evals,
        trace_validated: validate_trace(&report.trace, config).is_ok(),
    }
}

fn dists_to(report: &FirstPhaseReport, xbar: &[f64]) -> Vec<f64> {
    report
        .iterates
        .iter()
        .map(|x| linalg::norm(&linalg::sub(x, xbar)))
        .collect()
}

pub fn run(args: ToyArgs) -> anyhow::Result<bool> {
    let problem = toy_problem();
    let known = toy_known_points();
    let x0 = known.saddle_like;
    let out = &args.common.out;

    let mut all_ok = true;
    let mut solvers = Vec::new();
    let mut rate_runs = Vec::new();

    let ch = args.common.build_config(toy_hpgncm_config(), TOY_SEED)?;
    let cp = args.common.build_config(toy_pgn2cm_config(), TOY_SEED)?;

    if args.common.wants(SolverSel::Hpgncm) {
        let report = hpgncm_solve(&problem, &x0, &ch).map_err(|e| anyhow::anyhow!("{e}"))?;
        write_file(out, "toy_hpgncm_trace.csv", &trace_csv(&report.trace))?;
        let s = summarize("hpgncm", &report, &known.optimum, &ch);
        all_ok &= s.certified && s.trace_validated;
        println!(
            "hpgncm: {} after {} iterations, final point {:?}",
            s.status, s.iterations, s.final_x
        );
        solvers.push(s);
    }
    if args.common.wants(SolverSel::Pgn2cm) {
        let report = pgn2cm_solve(&problem, &x0, &cp).map_err(|e| anyhow::anyhow!("{e}"))?;
        write_file(out, "toy_pgn2cm_trace.csv", &trace_csv(&report.trace))?;
        let s = summarize("pgn2cm", &report, &known.optimum, &cp);
        all_ok &= s.certified && s.trace_validated;
        println!(
            "pgn2cm: {} after {} iterations, final point {:?}",
            s.status, s.iterations, s.final_x
        );
        solvers.push(s);
    }

    // first-phase rate traces; distances are measured to the output of the
    // Newton-CG first phase, which converges to the nearby second-order point
    let want_fp = args.common.wants(SolverSel::Fpgn2cm);
    let want_fg = args.common.wants(SolverSel::Fpgncm);
    if want_fp || want_fg {
        let rate_p = fpgn2cm_solve(
            &problem,
            &RATE_STUDY_START,
            &cp,
            ConvexityMode::Nonconvex,
            args.rate_iters,
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;
        let xbar = rate_p.final_x.clone();
        if want_fp {
            write_file(
                out,
                "toy_fpgn2cm_rate.csv",
                &rate_csv(&rate_p.trace, &dists_to(&rate_p, &xbar)),
            )?;
            all_ok &= rate_p.stop != FirstPhaseStop::LineSearchStall;
            rate_runs.push(ToyRateSummary {
                algorithm: "fpgn2cm".into(),
                stop: format!("{:?}", rate_p.stop),
                iterations: rate_p.trace.len().saturating_sub(1),
                final_x: rate_p.final_x.clone(),
                dist_to_xbar: 0.0,
            });
        }
        if want_fg {
            let rate_h = fpgncm_solve(&problem, &RATE_STUDY_START, &ch, args.rate_iters)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            write_file(
                out,
                "toy_fpgncm_rate.csv",
                &rate_csv(&rate_h.trace, &dists_to(&rate_h, &xbar)),
            )?;
            all_ok &= rate_h.stop != FirstPhaseStop::LineSearchStall;
            rate_runs.push(ToyRateSummary {
                algorithm: "fpgncm".into(),
                stop: format!("{:?}", rate_h.stop),
                iterations: rate_h.trace.len().saturating_sub(1),
                dist_to_xbar: linalg::norm(&linalg::sub(&rate_h.final_x, &xbar)),
                final_x: rate_h.final_x,
            });
        }
    }

    let summary = ToySummary {
        eps_g: ch.eps_g,
        eps_h: ch.eps_h,
        seed: ch.rng_seed,
        start: x0.to_vec(),
        rate_start: RATE_STUDY_START.to_vec(),
        solvers,
        rate_runs,
    };
    write_json(out, "toy_summary.json", &summary)?;
    Ok(all_ok)
}
