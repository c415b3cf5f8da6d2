//! Random quadratic-plus-l1 instances with planted spectra. Property-test
//! fodder: exact gradients, exact Hessians, and full control over curvature.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMat};
use crate::oracle::{CompositeProblem, SmoothOracle};

/// `f(x) = 1/2 (x - c)' Q (x - c)` with a dense symmetric `Q`.
pub struct QuadraticOracle {
    q: DenseMat,
    c: Vec<f64>,
}

impl QuadraticOracle {
    pub fn new(q: DenseMat, c: Vec<f64>) -> Result<Self> {
        if q.rows() != q.cols() || q.rows() != c.len() {
            return Err(Error::DimensionMismatch {
                context: "QuadraticOracle",
                expected: c.len(),
                got: q.rows(),
            });
        }
        Ok(Self { q, c })
    }

    pub fn hessian(&self) -> &DenseMat {
        &self.q
    }

    pub fn center(&self) -> &[f64] {
        &self.c
    }
}

impl SmoothOracle for QuadraticOracle {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d = linalg::sub(x, &self.c);
        0.5 * linalg::dot(&d, &self.q.matvec(&d))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.q.matvec(&linalg::sub(x, &self.c))
    }

    fn hess_vec(&self, _x: &[f64], v: &[f64]) -> Vec<f64> {
        self.q.matvec(v)
    }

    fn dense_hessian(&self, _x: &[f64]) -> Option<DenseMat> {
        Some(self.q.clone())
    }
}

/// Builds an instance with the given eigenvalues in a random orthogonal basis
/// and a random center in [-2, 2]^n. Deterministic per seed. `n <= 64`.
pub fn random_l1_quadratic(
    n: usize,
    spectrum: &[f64],
    lambda: f64,
    seed: u64,
) -> Result<CompositeProblem<QuadraticOracle>> {
    if n == 0 || n > 64 {
        return Err(Error::InvalidConfig(alloc::format!(
            "random_l1_quadratic supports 1 <= n <= 64, got {n}"
        )));
    }
    if spectrum.len() != n {
        return Err(Error::DimensionMismatch {
            context: "random_l1_quadratic spectrum",
            expected: n,
            got: spectrum.len(),
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let basis = linalg::random_orthogonal(n, &mut rng);
    let q = DenseMat::from_spectrum(&basis, spectrum);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    CompositeProblem::new(QuadraticOracle::new(q, c)?, lambda)
}
