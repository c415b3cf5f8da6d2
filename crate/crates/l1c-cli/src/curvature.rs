//! Post-run curvature reporting: smallest eigenvalue of the restricted
//! Hessian and of its scaled counterpart at a solver's output, for the
//! summary tables. Exact dense eigensolve on small supports, Lanczos Ritz
//! estimate otherwise.

use l1c_core::linalg::{self, SymOp};
use l1c_core::meo::dense_min_eigpair;
use l1c_core::oracle::{CompositeProblem, SmoothOracle};
use l1c_core::stationarity::{
    partition, restricted_operator, restricted_scaled_operator, scaling, SIGN_THRESHOLD_DEFAULT,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const DENSE_LIMIT: usize = 300;

fn min_eig(op: &mut impl SymOp, seed: u64) -> Option<f64> {
    if op.dim() <= DENSE_LIMIT {
        dense_min_eigpair(op).ok().map(|(v, _)| v)
    } else {
        Some(lanczos_min_ritz(op, 150, seed))
    }
}

/// Smallest Ritz value of a full-reorthogonalization Lanczos sweep; an
/// estimate from above of the smallest eigenvalue, good enough for reporting.
fn lanczos_min_ritz(op: &mut impl SymOp, iters: usize, seed: u64) -> f64 {
    let m = op.dim();
    let budget = iters.min(m);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut basis = vec![linalg::random_unit_vector(m, &mut rng)];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    for j in 0..budget {
        let v = basis[j].clone();
        let mut w = op.apply(&v);
        let alpha = linalg::dot(&v, &w);
        alphas.push(alpha);
        linalg::axpy(-alpha, &v, &mut w);
        if j > 0 {
            let beta_prev = betas[j - 1];
            linalg::axpy(-beta_prev, &basis[j - 1], &mut w);
        }
        for b in &basis {
            let c = linalg::dot(b, &w);
            linalg::axpy(-c, b, &mut w);
        }
        let beta = linalg::norm(&w);
        if beta <= 1e-12 || j + 1 == budget {
            break;
        }
        betas.push(beta);
        basis.push(linalg::scaled(&w, 1.0 / beta));
    }
    linalg::tridiag_min_eigpair(&alphas, &betas).0
}

/// Returns `(lambda_min(H restricted), lambda_min(S H S restricted))` at `x`,
/// or `None` entries when the support is empty.
pub fn restricted_curvature<O: SmoothOracle>(
    problem: &CompositeProblem<O>,
    x: &[f64],
    eps_g: f64,
) -> (Option<f64>, Option<f64>) {
    let part = partition(x, eps_g, SIGN_THRESHOLD_DEFAULT);
    if part.i_neq0.is_empty() {
        return (None, None);
    }
    let unscaled = restricted_operator(problem, x, &part.i_neq0)
        .ok()
        .and_then(|mut op| min_eig(&mut op, 0x5eed));
    let s = scaling(x, eps_g);
    let scaled = restricted_scaled_operator(problem, x, &part.i_neq0, &s)
        .ok()
        .and_then(|mut op| min_eig(&mut op, 0x5eed));
    (unscaled, scaled)
}
