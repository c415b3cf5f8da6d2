//! Minimal library usage: a custom oracle, one solve, one certificate.

use l1c_core::hpgncm::hpgncm_solve;
use l1c_core::{CompositeProblem, SmoothOracle, SolverConfig};

struct Paraboloid;

impl SmoothOracle for Paraboloid {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * ((x[0] - 3.0).powi(2) + 2.0 * x[1].powi(2))
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] - 3.0, 2.0 * x[1]]
    }
    fn hess_vec(&self, _x: &[f64], v: &[f64]) -> Vec<f64> {
        vec![v[0], 2.0 * v[1]]
    }
}

fn main() {
    let problem = CompositeProblem::new(Paraboloid, 0.5).unwrap();
    let config = SolverConfig::new(1e-6);
    let report = hpgncm_solve(&problem, &[0.0, 1.0], &config).unwrap();
    assert!(report.status.is_certificate());
    assert!((report.final_x[0] - 2.5).abs() < 1e-5); // soft-thresholded optimum
    println!(
        "{:?} at {:?} after {} iterations",
        report.status, report.final_x, report.iterations
    );
}
