//! CSV and JSON artifact writers.
//!
//! The trace CSV schema is fixed:
//! `iter,phase,step_kind,step_size,fval,norm_g,norm_g_eps,norm_Gt,lambda_min,hvp,grad,f_evals,wall_ms`.
//! Float fields print in shortest round-trip form, so parsing a trace back
//! recovers the exact values; reruns with a fixed seed are byte-identical in
//! every column except `wall_ms`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use l1c_core::trace::IterationTrace;

pub const TRACE_HEADER: &str =
    "iter,phase,step_kind,step_size,fval,norm_g,norm_g_eps,norm_Gt,lambda_min,hvp,grad,f_evals,wall_ms";

pub fn trace_csv(trace: &[IterationTrace]) -> String {
    let mut s = String::with_capacity(64 * (trace.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in trace {
        let lambda = r
            .lambda_min_estimate
            .map(|v| v.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.iter,
            r.phase.as_str(),
            r.step_kind.as_str(),
            r.step_size,
            r.fval,
            r.norm_g,
            r.norm_g_eps,
            r.norm_gt,
            lambda,
            r.counters.hvp_count,
            r.counters.grad_evals,
            r.counters.f_evals,
            r.wall_ms,
        );
    }
    s
}

/// Per-iteration columns for the convergence-rate figures.
pub fn rate_csv(trace: &[IterationTrace], dists: &[f64]) -> String {
    assert_eq!(trace.len(), dists.len());
    let mut s = String::from("iter,fval,norm_g,norm_g_eps,norm_Gt,dist_xbar\n");
    for (r, d) in trace.iter().zip(dists) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.iter, r.fval, r.norm_g, r.norm_g_eps, r.norm_gt, d
        );
    }
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_file(dir, name, &(text + "\n"))
}
