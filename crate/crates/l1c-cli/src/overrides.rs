//! Config-file overrides: a JSON object whose keys name solver-configuration
//! fields verbatim; every field is optional.

use l1c_core::SolverConfig;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub eps_g: Option<f64>,
    pub eps_h: Option<f64>,
    pub beta: Option<f64>,
    pub eta_bar: Option<f64>,
    pub eta_nc: Option<f64>,
    pub eta_sol: Option<f64>,
    pub theta_nc: Option<f64>,
    pub theta_sol: Option<f64>,
    pub zeta: Option<f64>,
    pub delta: Option<f64>,
    pub tau_hat: Option<f64>,
    pub sigma: Option<f64>,
    pub max_iters: Option<usize>,
    pub ls_max_backtracks: Option<usize>,
    pub ls_warm_start: Option<bool>,
    pub sign_threshold: Option<f64>,
    pub rng_seed: Option<u64>,
}

impl ConfigOverrides {
    pub fn apply(&self, config: &mut SolverConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { config.$field = v; })*
            };
        }
        set!(
            eps_g,
            eps_h,
            beta,
            eta_bar,
            eta_nc,
            eta_sol,
            theta_nc,
            theta_sol,
            zeta,
            delta,
            tau_hat,
            sigma,
            max_iters,
            ls_max_backtracks,
            ls_warm_start,
            sign_threshold,
            rng_seed
        );
    }
}
