//! Solver configuration: tolerances and line-search constants.

use alloc::format;

use crate::error::{Error, Result};
use crate::fmath;

/// All tolerances and line-search constants used by the solvers.
///
/// Two separate (`theta`, `eta`) pairs exist because the sufficient-decrease
/// tests differ between the Newton-CG step (quadratic decrease, `*_sol`) and
/// the curvature step (cubic decrease, `*_nc`), and the experiment
/// configurations use different values for each within one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// First-order target, in (0, 1).
    pub eps_g: f64,
    /// Second-order target, in (0, 1). Defaults to `eps_g.sqrt()`.
    pub eps_h: f64,
    /// Proximal line-search stepsize base, > 1.
    pub beta: f64,
    /// Proximal sufficient-decrease constant, in (0, 1].
    pub eta_bar: f64,
    /// Cubic-decrease line-search constant, in (0, 1/2).
    pub eta_nc: f64,
    /// Quadratic-decrease line-search constant, in (0, (1 - zeta)/2).
    pub eta_sol: f64,
    /// Backtracking factor for curvature steps, in (0, 1).
    pub theta_nc: f64,
    /// Backtracking factor for Newton-CG steps, in (0, 1).
    pub theta_sol: f64,
    /// Relative residual accuracy of capped CG, in (0, 1).
    pub zeta: f64,
    /// Exponent on the residual norm in the Newton regularization, in [0, 1].
    pub delta: f64,
    /// Upper factor of the admissible regularization interval, >= 1.
    pub tau_hat: f64,
    /// Failure probability of a minimum-eigenvalue certificate, in [0, 1).
    pub sigma: f64,
    /// Iteration cap.
    pub max_iters: usize,
    /// Backtracking cap per line search; exceeding it is a diagnosable stall.
    pub ls_max_backtracks: usize,
    /// When set, the proximal line search starts one exponent below the last
    /// accepted one instead of restarting at zero. Off by default.
    pub ls_warm_start: bool,
    /// |x_i| at or below this counts as zero when classifying signs.
    pub sign_threshold: f64,
    /// Seed for every random draw the solver makes.
    pub rng_seed: u64,
}

impl SolverConfig {
    /// Defaults for a given first-order target: `eps_h = sqrt(eps_g)`,
    /// `beta = 2`, `eta_bar = 0.7`, `eta_nc = 1e-4`, `theta_nc = 0.25`,
    /// `theta_sol = 0.7`, `zeta = 0.999`, `eta_sol = min((1-zeta)/4, 1e-4)`,
    /// `delta = 1`, `tau_hat = 1`, `sigma = 0.05`.
    ///
    /// `eta_bar` stays clear of 1: the proximal descent guarantee needs
    /// `t >= L / (2 - 2 eta_bar)`, which degenerates as `eta_bar` approaches
    /// one and makes the line search unsatisfiable on quadratic regions.
    pub fn new(eps_g: f64) -> Self {
        let zeta: f64 = 0.999;
        Self {
            eps_g,
            eps_h: fmath::sqrt(eps_g),
            beta: 2.0,
            eta_bar: 0.7,
            eta_nc: 1e-4,
            eta_sol: (0.25 * (1.0 - zeta)).min(1e-4),
            theta_nc: 0.25,
            theta_sol: 0.7,
            zeta,
            delta: 1.0,
            tau_hat: 1.0,
            sigma: 0.05,
            max_iters: 500_000,
            ls_max_backtracks: 100,
            ls_warm_start: false,
            sign_threshold: 1e-16,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn range(name: &str, v: f64, ok: bool) -> Result<()> {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {v} out of range")))
            }
        }
        range("eps_g", self.eps_g, self.eps_g > 0.0 && self.eps_g < 1.0)?;
        range("eps_h", self.eps_h, self.eps_h > 0.0 && self.eps_h < 1.0)?;
        range("beta", self.beta, self.beta > 1.0)?;
        range(
            "eta_bar",
            self.eta_bar,
            self.eta_bar > 0.0 && self.eta_bar <= 1.0,
        )?;
        range(
            "eta_nc",
            self.eta_nc,
            self.eta_nc > 0.0 && self.eta_nc < 0.5,
        )?;
        range("zeta", self.zeta, self.zeta > 0.0 && self.zeta < 1.0)?;
        range(
            "eta_sol",
            self.eta_sol,
            self.eta_sol > 0.0 && self.eta_sol < 0.5 * (1.0 - self.zeta),
        )?;
        range(
            "theta_nc",
            self.theta_nc,
            self.theta_nc > 0.0 && self.theta_nc < 1.0,
        )?;
        range(
            "theta_sol",
            self.theta_sol,
            self.theta_sol > 0.0 && self.theta_sol < 1.0,
        )?;
        range("delta", self.delta, (0.0..=1.0).contains(&self.delta))?;
        range("tau_hat", self.tau_hat, self.tau_hat >= 1.0)?;
        range("sigma", self.sigma, self.sigma >= 0.0 && self.sigma < 1.0)?;
        range(
            "sign_threshold",
            self.sign_threshold,
            self.sign_threshold >= 0.0,
        )?;
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if self.ls_max_backtracks == 0 {
            return Err(Error::InvalidConfig(
                "ls_max_backtracks must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverConfig::new(1e-4).validate().unwrap();
        SolverConfig::new(1e-5).validate().unwrap();
    }

    #[test]
    fn each_range_is_enforced() {
        let ok = SolverConfig::new(1e-4);
        let cases: &[fn(&mut SolverConfig)] = &[
            |c| c.eps_g = 0.0,
            |c| c.eps_g = 1.0,
            |c| c.eps_h = 0.0,
            |c| c.eps_h = 1.5,
            |c| c.beta = 1.0,
            |c| c.eta_bar = 0.0,
            |c| c.eta_bar = 1.1,
            |c| c.eta_nc = 0.5,
            |c| c.eta_sol = 0.5 * (1.0 - c.zeta),
            |c| c.theta_nc = 1.0,
            |c| c.theta_sol = 0.0,
            |c| c.zeta = 1.0,
            |c| c.delta = 1.2,
            |c| c.tau_hat = 0.5,
            |c| c.sigma = 1.0,
            |c| c.sigma = -0.1,
            |c| c.max_iters = 0,
            |c| c.ls_max_backtracks = 0,
            |c| c.sign_threshold = -1e-16,
            |c| c.beta = f64::NAN,
        ];
        for (i, mutate) in cases.iter().enumerate() {
            let mut bad = ok.clone();
            mutate(&mut bad);
            assert!(bad.validate().is_err(), "case {i} should fail validation");
        }
    }
}
