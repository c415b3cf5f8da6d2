//! `l1c scaling`: iteration counts of both solvers over a grid of first-order
//! targets on a fixed ill-conditioned quadratic family, with fitted log-log
//! slopes. Diagnostic only; the one qualitative expectation is that the
//! Newton-CG solver's slope magnitude does not exceed the hybrid solver's.

use clap::Args;
use serde::Serialize;
use std::fmt::Write as _;

use l1c_core::hpgncm::hpgncm_solve;
use l1c_core::pgn2cm::pgn2cm_solve;
use l1c_core::problems::quadratic::random_l1_quadratic;
use l1c_core::SolverConfig;

use crate::output::{write_file, write_json};
use crate::{CommonArgs, SolverSel};

const DEFAULT_SEED: u64 = 4242;

#[derive(Args, Debug)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated first-order targets, each in (1e-6, 1e-1).
    #[arg(long, default_value = "1e-2,3e-3,1e-3,3e-4,1e-4")]
    pub eps_grid: String,
    /// Dimension of the quadratic family (at most 64).
    #[arg(long, default_value_t = 24)]
    pub n: usize,
}

#[derive(Serialize)]
struct SlopeFit {
    algorithm: String,
    slope: f64,
    /// Half-width of the 95% confidence interval (absent with < 3 points).
    confidence_95: Option<f64>,
}

#[derive(Serialize)]
struct ScalingSummary {
    n: usize,
    seed: u64,
    eps_grid: Vec<f64>,
    fits: Vec<SlopeFit>,
    ordering_holds: Option<bool>,
}

fn fit(xs: &[f64], ys: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if xs.len() < 3 {
        return (slope, None);
    }
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    (slope, Some(1.96 * se))
}

pub fn run(args: ScalingArgs) -> anyhow::Result<bool> {
    let grid: Vec<f64> = args
        .eps_grid
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| anyhow::anyhow!("bad eps value {s:?}: {e}"))
        })
        .collect::<anyhow::Result<Vec<f64>>>()?;
    if grid.is_empty() {
        anyhow::bail!("--eps-grid must contain at least one value");
    }
    for &eps in &grid {
        if !(eps > 1e-6 && eps < 1e-1) {
            anyhow::bail!("eps {eps} outside (1e-6, 1e-1)");
        }
    }
    let seed = args.common.resolve_seed(DEFAULT_SEED)?;
    let n = args.n;
    let spectrum: Vec<f64> = (0..n)
        .map(|i| 1e-2 * (10.0f64 / 1e-2).powf(i as f64 / (n.max(2) - 1) as f64))
        .collect();
    let problem =
        random_l1_quadratic(n, &spectrum, 0.3, seed).map_err(|e| anyhow::anyhow!("{e}"))?;
    let x0 = vec![0.0; n];

    let solvers: Vec<SolverSel> = [SolverSel::Hpgncm, SolverSel::Pgn2cm]
        .into_iter()
        .filter(|s| args.common.wants(*s))
        .collect();
    if solvers.is_empty() {
        anyhow::bail!("scaling runs support --solver hpgncm or pgn2cm");
    }

    let mut csv = String::from("eps,solver,iterations,hvp_count,certified\n");
    let mut all_ok = true;
    let mut per_solver: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for solver in &solvers {
        let tag = match solver {
            SolverSel::Hpgncm => "hpgncm",
            SolverSel::Pgn2cm => "pgn2cm",
            _ => anyhow::bail!("scaling runs support --solver hpgncm or pgn2cm"),
        };
        let mut ln_eps = Vec::new();
        let mut ln_iters = Vec::new();
        for (k, &eps) in grid.iter().enumerate() {
            let mut config = args
                .common
                .build_config(SolverConfig::new(eps), DEFAULT_SEED)?;
            config.eps_g = eps;
            config.eps_h = eps.sqrt();
            config.rng_seed = seed + k as u64;
            let report = match solver {
                SolverSel::Hpgncm => hpgncm_solve(&problem, &x0, &config),
                SolverSel::Pgn2cm => pgn2cm_solve(&problem, &x0, &config),
                _ => unreachable!(),
            }
            .map_err(|e| anyhow::anyhow!("{e}"))?;
            let certified = report.status.is_certificate();
            all_ok &= certified;
            let _ = writeln!(
                csv,
                "{eps},{tag},{},{},{certified}",
                report.iterations, report.counters.hvp_count
            );
            ln_eps.push(eps.ln());
            ln_iters.push((report.iterations.max(1) as f64).ln());
        }
        per_solver.push((tag.to_string(), ln_eps, ln_iters));
    }

    let mut fits = Vec::new();
    for (tag, ln_eps, ln_iters) in &per_solver {
        if ln_eps.len() >= 2 {
            let (slope, ci) = fit(ln_eps, ln_iters);
            println!(
                "{tag}: log-log slope {slope:.3}{}",
                ci.map(|c| format!(" +/- {c:.3}")).unwrap_or_default()
            );
            fits.push(SlopeFit {
                algorithm: tag.clone(),
                slope,
                confidence_95: ci,
            });
        } else {
            println!("{tag}: single grid point, slope undefined");
        }
    }
    let ordering_holds = match (
        fits.iter().find(|f| f.algorithm == "pgn2cm"),
        fits.iter().find(|f| f.algorithm == "hpgncm"),
    ) {
        (Some(p), Some(h)) => {
            let holds = p.slope.abs() <= h.slope.abs();
            println!(
                "slope ordering |pgn2cm| <= |hpgncm|: {}",
                if holds { "holds" } else { "violated" }
            );
            Some(holds)
        }
        _ => None,
    };

    let out = &args.common.out;
    write_file(out, "scaling.csv", &csv)?;
    write_json(
        out,
        "scaling_summary.json",
        &ScalingSummary {
            n,
            seed,
            eps_grid: grid,
            fits,
            ordering_holds,
        },
    )?;
    Ok(all_ok)
}
