//! Student's t-regression over subsampled orthonormal DCT measurements:
//! `f(x) = sum_i log(1 + ((Ax - b)_i)^2 / nu)` plus an l1 term with
//! data-driven weight `0.1 ||grad f(0)||_inf`.
//!
//! The loss Hessian through the measurements is `A' Diag(w) A` with
//! `w_i = 2 (nu - u_i^2) / (nu + u_i^2)^2`, which turns negative as soon as a
//! residual exceeds `sqrt(nu)` — with `nu = 0.001` nonconvexity is the normal
//! operating regime, which is the point of the instance.
//!
//! The measurement operator keeps `m = n/8` rows of the orthonormal DCT
//! matrix, drawn without replacement; the transform is applied as a stored
//! dense `m x n` matrix (desk scale, no FFT path).

use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fmath;
use crate::linalg::{self, DenseMat};
use crate::oracle::{CompositeProblem, SmoothOracle};

pub const STUDENT_T_NU: f64 = 0.001;
pub const NOISE_SCALE: f64 = 0.1;
pub const NOISE_DOF: usize = 5;

/// Row `k` (0-based) of the orthonormal DCT matrix of size `n`:
/// `w_k cos(pi (2j - 1) k / (2n))` with `w_0 = sqrt(1/n)`, else `sqrt(2/n)`.
pub fn dct_row(n: usize, k: usize) -> Vec<f64> {
    let w = if k == 0 {
        fmath::sqrt(1.0 / n as f64)
    } else {
        fmath::sqrt(2.0 / n as f64)
    };
    (0..n)
        .map(|j| {
            w * fmath::cos(
                core::f64::consts::PI * (2.0 * j as f64 + 1.0) * k as f64 / (2.0 * n as f64),
            )
        })
        .collect()
}

/// Orthonormal DCT (type II) of `x`, applied directly in O(n^2).
pub fn dct2_orthonormal(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|k| linalg::dot(&dct_row(n, k), x)).collect()
}

/// Sparse-signal generator: `k = round(n/40)` nonzeros at distinct uniform
/// indices with magnitudes `sign * 10^(d * u / 20)`, `u` uniform on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub n: usize,
    pub k: usize,
    pub dynamic_range_db: f64,
    pub seed: u64,
}

impl SignalSpec {
    /// `n` must be a positive multiple of 8 (the instance keeps `n/8`
    /// measurements) and large enough for at least one nonzero.
    pub fn new(n: usize, dynamic_range_db: f64, seed: u64) -> Result<Self> {
        if n < 40 || !n.is_multiple_of(8) {
            return Err(Error::InvalidConfig(alloc::format!(
                "signal length must be a multiple of 8 and at least 40, got {n}"
            )));
        }
        if !(dynamic_range_db >= 0.0) || !dynamic_range_db.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "dynamic range must be a finite nonnegative dB value, got {dynamic_range_db}"
            )));
        }
        let k = fmath::round(n as f64 / 40.0) as usize;
        Ok(Self {
            n,
            k,
            dynamic_range_db,
            seed,
        })
    }
}

/// Draws `count` distinct indices from `0..n`, returned sorted.
fn distinct_indices<R: Rng>(n: usize, count: usize, rng: &mut R) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    let mut out: Vec<usize> = pool[..count].to_vec();
    out.sort_unstable();
    out
}

/// Generates the sparse reference signal for `spec` using the given stream.
pub fn sparse_signal<R: Rng>(spec: &SignalSpec, rng: &mut R) -> Vec<f64> {
    let mut x = vec![0.0; spec.n];
    let support = distinct_indices(spec.n, spec.k, rng);
    for &i in &support {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let u: f64 = rng.gen();
        x[i] = sign * fmath::powf(10.0, spec.dynamic_range_db * u / 20.0);
    }
    x
}

/// Student's t draw with `NOISE_DOF` degrees of freedom, via the
/// normal / chi-squared ratio.
fn student_t_draw<R: Rng>(rng: &mut R) -> f64 {
    let z = linalg::standard_normal(rng);
    let mut chi2 = 0.0;
    for _ in 0..NOISE_DOF {
        let g = linalg::standard_normal(rng);
        chi2 += g * g;
    }
    z / fmath::sqrt(chi2 / NOISE_DOF as f64)
}

/// Smooth part of the regression objective.
pub struct StudentTOracle {
    a: DenseMat,
    j_indices: Vec<usize>,
    b: Vec<f64>,
    nu: f64,
}

impl StudentTOracle {
    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn j_indices(&self) -> &[usize] {
        &self.j_indices
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn measurement_matrix(&self) -> &DenseMat {
        &self.a
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut u = self.a.matvec(x);
        for (ui, bi) in u.iter_mut().zip(&self.b) {
            *ui -= bi;
        }
        u
    }

    fn from_parts(n: usize, j_indices: Vec<usize>, b: Vec<f64>, nu: f64) -> Self {
        let m = j_indices.len();
        let mut a = DenseMat::zeros(m, n);
        for (r, &k) in j_indices.iter().enumerate() {
            for (c, v) in dct_row(n, k).into_iter().enumerate() {
                a.set(r, c, v);
            }
        }
        Self {
            a,
            j_indices,
            b,
            nu,
        }
    }
}

impl SmoothOracle for StudentTOracle {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.residual(x)
            .iter()
            .map(|u| fmath::ln_1p(u * u / self.nu))
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let u = self.residual(x);
        let w: Vec<f64> = u.iter().map(|ui| 2.0 * ui / (self.nu + ui * ui)).collect();
        self.a.t_matvec(&w)
    }

    fn hess_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let u = self.residual(x);
        let av = self.a.matvec(v);
        let w: Vec<f64> = u
            .iter()
            .zip(&av)
            .map(|(ui, avi)| {
                let den = self.nu + ui * ui;
                2.0 * (self.nu - ui * ui) / (den * den) * avi
            })
            .collect();
        self.a.t_matvec(&w)
    }
}

/// Builds an instance from `spec`. Draw order is frozen for reproducibility:
/// the measurement row set, then the signal, then the noise. Returns the
/// composite problem and the reference signal.
pub fn build_student_t(spec: &SignalSpec) -> Result<(CompositeProblem<StudentTOracle>, Vec<f64>)> {
    let n = spec.n;
    let m = n / 8;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);

    let j_indices = distinct_indices(n, m, &mut rng);
    let x_true = sparse_signal(spec, &mut rng);

    let mut a = DenseMat::zeros(m, n);
    for (r, &k) in j_indices.iter().enumerate() {
        for (c, v) in dct_row(n, k).into_iter().enumerate() {
            a.set(r, c, v);
        }
    }
    let mut b = a.matvec(&x_true);
    for bi in b.iter_mut() {
        *bi += NOISE_SCALE * student_t_draw(&mut rng);
    }

    let oracle = StudentTOracle {
        a,
        j_indices,
        b,
        nu: STUDENT_T_NU,
    };
    let lambda = 0.1 * linalg::norm_inf(&oracle.gradient(&vec![0.0; n]));
    if !(lambda > 0.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "degenerate instance: derived l1 weight {lambda} is not positive"
        )));
    }
    Ok((CompositeProblem::new(oracle, lambda)?, x_true))
}

/// Serializable instance description for exact cross-run reproduction.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentTFixture {
    pub n: usize,
    pub m: usize,
    pub j_indices: Vec<usize>,
    pub x_true: Vec<f64>,
    pub b: Vec<f64>,
    pub nu: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl StudentTFixture {
    pub fn from_instance(
        problem: &CompositeProblem<StudentTOracle>,
        x_true: &[f64],
        seed: u64,
    ) -> Self {
        Self {
            n: problem.dim(),
            m: problem.oracle.rows(),
            j_indices: problem.oracle.j_indices().to_vec(),
            x_true: x_true.to_vec(),
            b: problem.oracle.b().to_vec(),
            nu: problem.oracle.nu(),
            lambda: problem.lambda(),
            seed,
        }
    }

    /// Rebuilds the exact problem: the measurement matrix comes from the
    /// stored row indices; `b`, `nu`, and `lambda` are taken verbatim.
    pub fn into_problem(self) -> Result<CompositeProblem<StudentTOracle>> {
        if self.j_indices.len() != self.m {
            return Err(Error::DimensionMismatch {
                context: "fixture row set",
                expected: self.m,
                got: self.j_indices.len(),
            });
        }
        let oracle = StudentTOracle::from_parts(self.n, self.j_indices, self.b, self.nu);
        CompositeProblem::new(oracle, self.lambda)
    }
}

/// Hybrid-solver parameters for the regression runs.
pub fn student_t_hpgncm_config(eps_g: f64) -> SolverConfig {
    let mut c = SolverConfig::new(eps_g);
    c.beta = 2.75;
    c.eta_bar = 0.7;
    c.eta_nc = 1e-4;
    c.theta_nc = 0.25;
    c
}

/// Newton-CG-solver parameters for the regression runs.
pub fn student_t_pgn2cm_config(eps_g: f64) -> SolverConfig {
    let mut c = SolverConfig::new(eps_g);
    c.beta = 2.75;
    c.zeta = 0.999;
    c.eta_sol = (0.25 * (1.0 - c.zeta)).min(1e-4);
    c.eta_nc = (0.25 * (1.0 - c.zeta)).min(1e-4);
    c.theta_sol = 0.75;
    c.theta_nc = 0.3;
    c.delta = 1.0;
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::check_oracle;

    #[test]
    fn dct_basis_vector_example() {
        // first basis vector: entries w_k cos(pi k / (2n)) for n = 4
        let mut e1 = vec![0.0; 4];
        e1[0] = 1.0;
        let y = dct2_orthonormal(&e1);
        assert!((y[0] - 0.5).abs() < 1e-15);
        let w2 = fmath::sqrt(0.5);
        for (k, yk) in y.iter().enumerate().skip(1) {
            let want = w2 * fmath::cos(core::f64::consts::PI * k as f64 / 8.0);
            assert!((yk - want).abs() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn dct_preserves_norm() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for n in [4usize, 16, 64] {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = dct2_orthonormal(&x);
            assert!((linalg::norm(&y) - linalg::norm(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn dct_of_constant_vector_is_first_basis_row() {
        let n = 32;
        let x = vec![1.0 / fmath::sqrt(n as f64); n];
        let y = dct2_orthonormal(&x);
        assert!((y[0] - 1.0).abs() < 1e-12);
        for yk in &y[1..] {
            assert!(yk.abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_rows_are_orthonormal() {
        let spec = SignalSpec::new(256, 20.0, 7).unwrap();
        let (problem, _) = build_student_t(&spec).unwrap();
        let a = problem.oracle.measurement_matrix();
        let m = a.rows();
        for i in 0..m {
            for j in 0..m {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = linalg::dot(a.row(i), a.row(j));
                assert!((got - want).abs() < 1e-10, "row {i} x row {j}");
            }
        }
    }

    #[test]
    fn signal_spec_counts() {
        assert_eq!(SignalSpec::new(256, 20.0, 0).unwrap().k, 6);
        assert_eq!(SignalSpec::new(512, 20.0, 0).unwrap().k, 13);
        assert_eq!(SignalSpec::new(1024, 20.0, 0).unwrap().k, 26);
        assert!(SignalSpec::new(255, 20.0, 0).is_err());
    }

    #[test]
    fn signal_magnitudes_in_dynamic_range() {
        let d = 40.0;
        let spec = SignalSpec::new(256, d, 3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
        let x = sparse_signal(&spec, &mut rng);
        let nonzeros: Vec<f64> = x.iter().copied().filter(|v| *v != 0.0).collect();
        assert_eq!(nonzeros.len(), spec.k);
        let hi = fmath::powf(10.0, d / 20.0);
        for v in nonzeros {
            assert!(v.abs() >= 1.0 && v.abs() <= hi, "{v}");
        }
    }

    #[test]
    fn instance_sizes_and_determinism() {
        let spec = SignalSpec::new(256, 20.0, 11).unwrap();
        let (p1, x1) = build_student_t(&spec).unwrap();
        let (p2, x2) = build_student_t(&spec).unwrap();
        assert_eq!(p1.oracle.rows(), 32);
        assert_eq!(x1, x2);
        assert_eq!(p1.oracle.j_indices(), p2.oracle.j_indices());
        assert_eq!(p1.oracle.b(), p2.oracle.b());
        assert_eq!(p1.lambda(), p2.lambda());
    }

    #[test]
    fn oracle_matches_finite_differences() {
        let spec = SignalSpec::new(64, 20.0, 5).unwrap();
        let (problem, x_true) = build_student_t(&spec).unwrap();
        // at zero and near the signal; h = 1e-5 per the documented probe
        let zero = vec![0.0; 64];
        let report = check_oracle(&problem.oracle, &zero, 1e-5).unwrap();
        assert!(report.failure.is_none());
        assert!(report.max_gradient_error <= 1e-5, "{report:?}");
        assert!(report.max_hess_vec_error <= 1e-5, "{report:?}");
        let report = check_oracle(&problem.oracle, &x_true, 1e-6).unwrap();
        assert!(report.max_hess_vec_error <= 1e-3, "{report:?}");
    }

    #[test]
    fn hess_vec_is_a_symmetric_bilinear_form() {
        let spec = SignalSpec::new(64, 20.0, 2).unwrap();
        let (problem, x_true) = build_student_t(&spec).unwrap();
        let (lin, sym) = crate::oracle::check_hess_vec_form(&problem.oracle, &x_true);
        assert!(lin <= 1e-10, "linearity error {lin}");
        assert!(sym <= 1e-10, "symmetry error {sym}");
    }

    #[test]
    fn loss_curvature_goes_negative_past_sqrt_nu() {
        // scalar sanity check of the Hessian weight sign
        let nu = STUDENT_T_NU;
        let w = |u: f64| 2.0 * (nu - u * u) / (nu + u * u) / (nu + u * u);
        assert!(w(0.0) > 0.0);
        assert!(w(2.0 * fmath::sqrt(nu)) < 0.0);
    }

    #[test]
    fn fixture_roundtrip_reproduces_oracle() {
        let spec = SignalSpec::new(64, 20.0, 13).unwrap();
        let (problem, x_true) = build_student_t(&spec).unwrap();
        let fixture = StudentTFixture::from_instance(&problem, &x_true, spec.seed);
        let rebuilt = fixture.clone().into_problem().unwrap();
        let x: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(problem.oracle.value(&x), rebuilt.oracle.value(&x));
        assert_eq!(problem.oracle.gradient(&x), rebuilt.oracle.gradient(&x));
        assert_eq!(problem.lambda(), rebuilt.lambda());
    }

    #[test]
    fn zero_noise_zero_signal_instance_is_rejected() {
        // with b = 0 the derived l1 weight is zero, which the composite
        // problem refuses
        let fixture = StudentTFixture {
            n: 64,
            m: 8,
            j_indices: (0..8).collect(),
            x_true: vec![0.0; 64],
            b: vec![0.0; 8],
            nu: STUDENT_T_NU,
            lambda: 0.0,
            seed: 0,
        };
        assert!(fixture.into_problem().is_err());
    }

    #[test]
    fn configs_validate() {
        student_t_hpgncm_config(1e-4).validate().unwrap();
        student_t_pgn2cm_config(1e-4).validate().unwrap();
    }
}
