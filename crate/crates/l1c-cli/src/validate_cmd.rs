#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a < b)` also rejects NaN

//! `l1c validate-trace`: re-checks an emitted trace CSV against its
//! line-search inequalities and the monotone-decrease contract.
//!
//! Proximal rows and curvature rows carry everything their inequality needs
//! (the curvature direction's norm is the recorded eigenvalue estimate's
//! magnitude) and are re-verified exactly. Newton-CG solution rows do not
//! carry the direction norm in the fixed schema, so for those only strict
//! decrease is checked; the full ledger over in-memory traces is enforced by
//! the library's validator and the acceptance suite.

use clap::Args;
use std::path::PathBuf;

use l1c_core::SolverConfig;

use crate::overrides::ConfigOverrides;

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Trace CSV emitted by a run command.
    pub path: PathBuf,
    /// First-order target the run used.
    #[arg(long, default_value_t = 1e-4)]
    pub eps_g: f64,
    /// JSON file with the solver configuration the run used.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    ProxG,
    NewtonCgSol,
    NewtonCgNc,
    MeoNc,
    Terminated,
}

struct Row {
    iter: usize,
    kind: Kind,
    step_size: f64,
    fval: f64,
    norm_gt: f64,
    lambda_min: Option<f64>,
}

fn parse(path: &PathBuf) -> anyhow::Result<Vec<Row>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow::anyhow!("empty file"))?;
    if header != crate::output::TRACE_HEADER {
        anyhow::bail!(
            "unexpected header; want\n  {}\ngot\n  {header}",
            crate::output::TRACE_HEADER
        );
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            anyhow::bail!("line {}: expected 13 fields, got {}", k + 2, f.len());
        }
        let kind = match f[2] {
            "ProxG" => Kind::ProxG,
            "NewtonCgSol" => Kind::NewtonCgSol,
            "NewtonCgNc" => Kind::NewtonCgNc,
            "MeoNc" => Kind::MeoNc,
            "Terminated" => Kind::Terminated,
            other => anyhow::bail!("line {}: unknown step kind {other:?}", k + 2),
        };
        let num = |s: &str, what: &str| -> anyhow::Result<f64> {
            s.parse::<f64>()
                .map_err(|e| anyhow::anyhow!("line {}: bad {what} {s:?}: {e}", k + 2))
        };
        rows.push(Row {
            iter: f[0]
                .parse()
                .map_err(|e| anyhow::anyhow!("line {}: bad iter: {e}", k + 2))?,
            kind,
            step_size: num(f[3], "step_size")?,
            fval: num(f[4], "fval")?,
            norm_gt: num(f[7], "norm_Gt")?,
            lambda_min: if f[8].is_empty() {
                None
            } else {
                Some(num(f[8], "lambda_min")?)
            },
        });
    }
    Ok(rows)
}

pub fn run(args: ValidateArgs) -> anyhow::Result<bool> {
    let mut config = SolverConfig::new(args.eps_g);
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        let ov: ConfigOverrides = serde_json::from_str(&text)?;
        ov.apply(&mut config);
    }
    let rows = parse(&args.path)?;
    if rows.is_empty() {
        anyhow::bail!("no rows in {}", args.path.display());
    }

    let mut checked_exact = 0usize;
    let mut checked_decrease_only = 0usize;
    for w in rows.windows(2) {
        let (r, next) = (&w[0], &w[1]);
        if r.kind == Kind::Terminated {
            anyhow::bail!("row {}: trace continues after termination", r.iter);
        }
        if !(next.fval < r.fval) {
            anyhow::bail!(
                "row {}: objective did not strictly decrease ({} -> {})",
                r.iter,
                r.fval,
                next.fval
            );
        }
        let bound = match r.kind {
            Kind::ProxG => Some(r.fval - (config.eta_bar / r.step_size) * r.norm_gt * r.norm_gt),
            Kind::MeoNc => {
                let d = match r.lambda_min {
                    Some(l) if l < 0.0 => -l,
                    _ => anyhow::bail!("row {}: curvature row without an estimate", r.iter),
                };
                Some(r.fval - config.eta_nc * r.step_size * r.step_size * d * d * d)
            }
            Kind::NewtonCgNc => {
                let d = match r.lambda_min {
                    Some(l) if l < 0.0 => -l,
                    _ => anyhow::bail!("row {}: curvature row without an estimate", r.iter),
                };
                Some(r.fval - config.eta_sol * r.step_size * r.step_size * config.eps_h * d * d)
            }
            Kind::NewtonCgSol => None,
            Kind::Terminated => unreachable!(),
        };
        match bound {
            Some(b) => {
                if !(next.fval < b) {
                    anyhow::bail!(
                        "row {}: {:?} step violates its line-search inequality ({} vs bound {})",
                        r.iter,
                        r.kind,
                        next.fval,
                        b
                    );
                }
                checked_exact += 1;
            }
            None => checked_decrease_only += 1,
        }
    }
    println!(
        "{}: {} rows valid ({checked_exact} exact line-search checks, {checked_decrease_only} decrease-only)",
        args.path.display(),
        rows.len()
    );
    Ok(true)
}
