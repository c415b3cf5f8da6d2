//! `l1c student-t`: seeded regression trials run in parallel, one summary row
//! per solver with the mean iteration count, objective, residual, curvature,
//! and operation counts over the trials.

use clap::Args;
use serde::{Deserialize, Serialize};
use std::sync::Mutex;

use l1c_core::hpgncm::{fpgncm_solve, hpgncm_solve, FirstPhaseStop};
use l1c_core::linalg;
use l1c_core::pgn2cm::{fpgn2cm_solve, pgn2cm_solve, ConvexityMode};
use l1c_core::problems::student_t::{
    build_student_t, student_t_hpgncm_config, student_t_pgn2cm_config, SignalSpec, StudentTFixture,
    StudentTOracle,
};
use l1c_core::stationarity::subgradient_residual;
use l1c_core::trace::validate_trace;
use l1c_core::{CompositeProblem, SolveReport, SolverConfig};

use crate::curvature::restricted_curvature;
use crate::output::{trace_csv, write_file, write_json};
use crate::{CommonArgs, SolverSel};

const DEFAULT_SEED: u64 = 9000;

#[derive(Args, Debug)]
pub struct StudentTArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Signal length.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Dynamic range of the signal in dB.
    #[arg(long, default_value_t = 20.0)]
    pub d: f64,
    /// Number of independent seeded trials.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Reuse a serialized instance instead of generating one (forces one trial).
    #[arg(long)]
    pub fixture: Option<std::path::PathBuf>,
    /// Skip writing per-trial instance fixtures.
    #[arg(long, default_value_t = false)]
    pub no_fixtures: bool,
    /// Iteration budget for first-phase rate runs (--solver fpgncm|fpgn2cm).
    #[arg(long, default_value_t = 5000)]
    pub rate_iters: usize,
}

/// One summary row; the columns mirror the experiment tables.
#[derive(Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub n: usize,
    pub d: f64,
    pub trials: usize,
    pub certified_trials: usize,
    pub mean_iter: f64,
    pub mean_fval: f64,
    pub mean_time_ms: f64,
    pub mean_norm_g: f64,
    pub mean_lambda_min_h: Option<f64>,
    pub mean_lambda_min_shs: Option<f64>,
    pub mean_hvp_count: f64,
    pub mean_grad_evals: f64,
}

#[derive(Serialize)]
struct StudentTSummary {
    n: usize,
    d: f64,
    trials: usize,
    eps_g: f64,
    eps_h: f64,
    seed_base: u64,
    max_iters: usize,
    rows: Vec<SummaryRow>,
}

struct TrialStats {
    iterations: f64,
    fval: f64,
    time_ms: f64,
    norm_g: f64,
    lambda_h: Option<f64>,
    lambda_shs: Option<f64>,
    hvp: f64,
    grad: f64,
    certified: bool,
    validated: bool,
    trace_bytes: String,
}

fn run_one(
    problem: &CompositeProblem<StudentTOracle>,
    config: &SolverConfig,
    solver: SolverSel,
) -> anyhow::Result<TrialStats> {
    let x0 = vec![0.0; problem.dim()];
    let report: SolveReport = match solver {
        SolverSel::Hpgncm => hpgncm_solve(problem, &x0, config),
        SolverSel::Pgn2cm => pgn2cm_solve(problem, &x0, config),
        _ => unreachable!("first-phase variants are not part of the trial sweep"),
    }
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let (lambda_h, lambda_shs) = restricted_curvature(problem, &report.final_x, config.eps_g);
    let g = subgradient_residual(problem, &report.final_x);
    let validated = validate_trace(&report.trace, config).is_ok();
    Ok(TrialStats {
        iterations: report.iterations as f64,
        fval: report.final_objective,
        time_ms: report.trace.last().map(|r| r.wall_ms).unwrap_or(0.0),
        norm_g: linalg::norm(&g),
        lambda_h,
        lambda_shs,
        hvp: report.counters.hvp_count as f64,
        grad: report.counters.grad_evals as f64,
        certified: report.status.is_certificate(),
        validated,
        trace_bytes: trace_csv(&report.trace),
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// First-phase rate study on one instance: distances are measured against
/// the output of the Newton-CG first phase after the full budget.
fn run_rate_study(args: &StudentTArgs, eps_g: f64, seed: u64) -> anyhow::Result<bool> {
    let out = &args.common.out;
    let (problem, _x_true) = if let Some(path) = &args.fixture {
        let text = std::fs::read_to_string(path)?;
        let fixture: FixtureJson = serde_json::from_str(&text)?;
        fixture.into_parts()?
    } else {
        let spec = SignalSpec::new(args.n, args.d, seed).map_err(|e| anyhow::anyhow!("{e}"))?;
        build_student_t(&spec).map_err(|e| anyhow::anyhow!("{e}"))?
    };
    let x0 = vec![0.0; problem.dim()];

    let mut cp = args
        .common
        .build_config(student_t_pgn2cm_config(eps_g), DEFAULT_SEED)?;
    cp.rng_seed = seed;
    let newton = fpgn2cm_solve(&problem, &x0, &cp, ConvexityMode::Nonconvex, args.rate_iters)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let xbar = newton.final_x.clone();
    let mut all_ok = newton.stop != FirstPhaseStop::LineSearchStall;

    let dists = |iterates: &[Vec<f64>]| -> Vec<f64> {
        iterates
            .iter()
            .map(|x| linalg::norm(&linalg::sub(x, &xbar)))
            .collect()
    };

    if args.common.wants(SolverSel::Fpgn2cm) {
        write_file(
            out,
            "student_t_fpgn2cm_rate.csv",
            &crate::output::rate_csv(&newton.trace, &dists(&newton.iterates)),
        )?;
        println!(
            "fpgn2cm: {:?} after {} rows, final residual {:.2e}",
            newton.stop,
            newton.trace.len(),
            newton.trace.last().map(|r| r.norm_g_eps).unwrap_or(f64::NAN)
        );
    }
    if args.common.wants(SolverSel::Fpgncm) {
        let mut ch = args
            .common
            .build_config(student_t_hpgncm_config(eps_g), DEFAULT_SEED)?;
        ch.rng_seed = seed;
        let prox = fpgncm_solve(&problem, &x0, &ch, args.rate_iters)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        all_ok &= prox.stop != FirstPhaseStop::LineSearchStall;
        write_file(
            out,
            "student_t_fpgncm_rate.csv",
            &crate::output::rate_csv(&prox.trace, &dists(&prox.iterates)),
        )?;
        println!(
            "fpgncm: {:?} after {} rows, final residual {:.2e}",
            prox.stop,
            prox.trace.len(),
            prox.trace.last().map(|r| r.norm_g).unwrap_or(f64::NAN)
        );
    }
    Ok(all_ok)
}

pub fn run(args: StudentTArgs) -> anyhow::Result<bool> {
    if ![256usize, 512, 1024].contains(&args.n) {
        anyhow::bail!("--n must be one of 256, 512, 1024 (got {})", args.n);
    }
    if ![20.0, 40.0, 60.0, 80.0].contains(&args.d) {
        anyhow::bail!("--d must be one of 20, 40, 60, 80 (got {})", args.d);
    }
    let trials = if args.fixture.is_some() {
        1
    } else {
        args.trials
    };
    if trials == 0 {
        anyhow::bail!("--trials must be at least 1");
    }
    let eps_g = args.common.eps_g.unwrap_or(1e-4);
    let seed_base = args.common.resolve_seed(DEFAULT_SEED)?;

    // first-phase variants run the convergence-rate study instead of trials
    if matches!(
        args.common.solver,
        Some(SolverSel::Fpgncm) | Some(SolverSel::Fpgn2cm)
    ) {
        return run_rate_study(&args, eps_g, seed_base);
    }
    let out = &args.common.out;

    let solvers: Vec<SolverSel> = [SolverSel::Hpgncm, SolverSel::Pgn2cm]
        .into_iter()
        .filter(|s| args.common.wants(*s))
        .collect();

    // instances are built per trial from seed_base + trial
    let mut problems: Vec<(u64, CompositeProblem<StudentTOracle>, Vec<f64>)> = Vec::new();
    for trial in 0..trials {
        let seed = seed_base + trial as u64;
        if let Some(path) = &args.fixture {
            let text = std::fs::read_to_string(path)?;
            let fixture: FixtureJson = serde_json::from_str(&text)?;
            let (problem, x_true) = fixture.into_parts()?;
            problems.push((seed, problem, x_true));
        } else {
            let spec = SignalSpec::new(args.n, args.d, seed).map_err(|e| anyhow::anyhow!("{e}"))?;
            let (problem, x_true) = build_student_t(&spec).map_err(|e| anyhow::anyhow!("{e}"))?;
            problems.push((seed, problem, x_true));
        }
    }

    // per-trial solver configurations (seeded per trial)
    let mut configs: Vec<Vec<SolverConfig>> = Vec::new();
    for trial in 0..trials {
        let mut per_solver = Vec::new();
        for solver in &solvers {
            let preset = match solver {
                SolverSel::Hpgncm => student_t_hpgncm_config(eps_g),
                SolverSel::Pgn2cm => student_t_pgn2cm_config(eps_g),
                _ => unreachable!(),
            };
            let mut config = args.common.build_config(preset, DEFAULT_SEED)?;
            config.rng_seed = seed_base + trial as u64;
            per_solver.push(config);
        }
        configs.push(per_solver);
    }

    // trials run in parallel; results land in a single collector and all
    // file writes happen afterwards on this thread, in trial order
    let results: Mutex<Vec<Option<anyhow::Result<Vec<TrialStats>>>>> =
        Mutex::new((0..trials).map(|_| None).collect());
    let workers = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(4)
        .min(trials);
    std::thread::scope(|scope| {
        for w in 0..workers {
            let problems = &problems;
            let configs = &configs;
            let solvers = &solvers;
            let results = &results;
            scope.spawn(move || {
                let mut t = w;
                while t < trials {
                    let mut stats = Vec::new();
                    let mut failure: Option<anyhow::Error> = None;
                    for (k, solver) in solvers.iter().enumerate() {
                        match run_one(&problems[t].1, &configs[t][k], *solver) {
                            Ok(s) => stats.push(s),
                            Err(e) => {
                                failure = Some(e);
                                break;
                            }
                        }
                    }
                    let entry = match failure {
                        Some(e) => Err(e),
                        None => Ok(stats),
                    };
                    results.lock().unwrap()[t] = Some(entry);
                    t += workers;
                }
            });
        }
    });

    let collected = results.into_inner().unwrap();
    let mut per_trial: Vec<Vec<TrialStats>> = Vec::new();
    for (t, entry) in collected.into_iter().enumerate() {
        per_trial.push(
            entry
                .expect("worker covered every trial")
                .map_err(|e| anyhow::anyhow!("trial {t}: {e}"))?,
        );
    }

    // artifacts
    let mut all_ok = true;
    for (t, stats) in per_trial.iter().enumerate() {
        for (k, solver) in solvers.iter().enumerate() {
            let tag = match solver {
                SolverSel::Hpgncm => "hpgncm",
                SolverSel::Pgn2cm => "pgn2cm",
                _ => unreachable!(),
            };
            write_file(
                out,
                &format!("student_t_{tag}_trial{t}.csv"),
                &stats[k].trace_bytes,
            )?;
            all_ok &= stats[k].certified && stats[k].validated;
        }
        if !args.no_fixtures && args.fixture.is_none() {
            let (seed, problem, x_true) = &problems[t];
            let fixture = StudentTFixture::from_instance(problem, x_true, *seed);
            write_json(
                out,
                &format!("student_t_instance_trial{t}.json"),
                &FixtureJson::from(fixture),
            )?;
        }
    }

    let mut rows = Vec::new();
    for (k, solver) in solvers.iter().enumerate() {
        let tag = match solver {
            SolverSel::Hpgncm => "hpgncm",
            SolverSel::Pgn2cm => "pgn2cm",
            _ => unreachable!(),
        };
        let stats = per_trial.iter().map(|t| &t[k]);
        let row = SummaryRow {
            algorithm: tag.to_string(),
            n: args.n,
            d: args.d,
            trials,
            certified_trials: per_trial.iter().filter(|t| t[k].certified).count(),
            mean_iter: mean(stats.clone().map(|s| s.iterations)),
            mean_fval: mean(stats.clone().map(|s| s.fval)),
            mean_time_ms: mean(stats.clone().map(|s| s.time_ms)),
            mean_norm_g: mean(stats.clone().map(|s| s.norm_g)),
            mean_lambda_min_h: mean_opt(stats.clone().map(|s| s.lambda_h)),
            mean_lambda_min_shs: mean_opt(stats.clone().map(|s| s.lambda_shs)),
            mean_hvp_count: mean(stats.clone().map(|s| s.hvp)),
            mean_grad_evals: mean(stats.clone().map(|s| s.grad)),
        };
        println!(
            "{:>7}  n {:5} d {:3.0}  mean iter {:>9.0}  mean fval {:>9.4}  mean ||g|| {:.2e}  mean lam_min(H) {:?}  mean lam_min(SHS) {:?}",
            row.algorithm,
            row.n,
            row.d,
            row.mean_iter,
            row.mean_fval,
            row.mean_norm_g,
            row.mean_lambda_min_h,
            row.mean_lambda_min_shs,
        );
        rows.push(row);
    }

    let config0 = &configs[0][0];
    let summary = StudentTSummary {
        n: args.n,
        d: args.d,
        trials,
        eps_g,
        eps_h: config0.eps_h,
        seed_base,
        max_iters: config0.max_iters,
        rows,
    };
    write_json(out, "student_t_summary.json", &summary)?;
    Ok(all_ok)
}

/// Serde mirror of the core fixture type.
#[derive(Serialize, Deserialize)]
pub struct FixtureJson {
    pub n: usize,
    pub m: usize,
    pub j_indices: Vec<usize>,
    pub x_true: Vec<f64>,
    pub b: Vec<f64>,
    pub nu: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl From<StudentTFixture> for FixtureJson {
    fn from(f: StudentTFixture) -> Self {
        Self {
            n: f.n,
            m: f.m,
            j_indices: f.j_indices,
            x_true: f.x_true,
            b: f.b,
            nu: f.nu,
            lambda: f.lambda,
            seed: f.seed,
        }
    }
}

impl FixtureJson {
    fn into_parts(self) -> anyhow::Result<(CompositeProblem<StudentTOracle>, Vec<f64>)> {
        let x_true = self.x_true.clone();
        let fixture = StudentTFixture {
            n: self.n,
            m: self.m,
            j_indices: self.j_indices,
            x_true: self.x_true,
            b: self.b,
            nu: self.nu,
            lambda: self.lambda,
            seed: self.seed,
        };
        let problem = fixture.into_problem().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok((problem, x_true))
    }
}
