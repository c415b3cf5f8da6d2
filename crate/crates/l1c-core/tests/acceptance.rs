//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measurements (run with `--nocapture` to see them).
//!
//! Expected values tagged as derived are computed by independent oracles
//! living in this file (dense eigensolves, closed-form branch evaluation,
//! exact linear solves), never by the library path under test.

use std::time::Instant;

use l1c_core::capped_cg::{capped_cg, CappedCgParams, DirectionKind, KappaRule};
use l1c_core::config::SolverConfig;
use l1c_core::hpgncm::{fpgncm_solve, hpgncm_solve};
use l1c_core::linalg::{self, DenseMat, DenseOp};
use l1c_core::meo::{dense_min_eigpair, meo, MeoOutcome};
use l1c_core::pgn2cm::{fpgn2cm_solve, pgn2cm_solve, ConvexityMode};
use l1c_core::problems::quadratic::random_l1_quadratic;
use l1c_core::problems::student_t::{
    build_student_t, student_t_hpgncm_config, student_t_pgn2cm_config, SignalSpec,
};
use l1c_core::problems::toy::{
    toy_hpgncm_config, toy_known_points, toy_pgn2cm_config, toy_problem, RATE_STUDY_START,
    TOY_EPS_G,
};
use l1c_core::stationarity::{
    self, gradient_mapping_with_grad, matching_stepsize, partition, relaxed_residual,
    restricted_scaled_operator, scaling, subgradient_residual, SIGN_THRESHOLD_DEFAULT,
};
use l1c_core::trace::{validate_trace, SolveStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    linalg::norm(&linalg::sub(a, b))
}

/// Random symmetric matrix with a planted spectrum (independent oracle
/// construction used by several criteria).
fn planted_sym(rng: &mut ChaCha20Rng, eigs: &[f64]) -> DenseMat {
    let q = linalg::random_orthogonal(eigs.len(), rng);
    DenseMat::from_spectrum(&q, eigs)
}

// --- criterion 1 -----------------------------------------------------------

#[test]
fn criterion_1_residual_relations() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let mut max_upper_gap = f64::NEG_INFINITY;
    let mut max_match_gap = f64::NEG_INFINITY;
    for trial in 0..1000 {
        let n = rng.gen_range(1..=8);
        let spectrum: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..5.0)).collect();
        let lambda = rng.gen_range(0.01..2.0);
        let problem = random_l1_quadratic(n, &spectrum, lambda, 1000 + trial).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();

        let g = subgradient_residual(&problem, &x);
        let norm_g = linalg::norm(&g);

        // two-sided relation, arbitrary stepsize on a log grid
        let t = 10f64.powf(rng.gen_range(-3.0..3.0));
        let gt = stationarity::gradient_mapping(&problem, &x, t).unwrap();
        let gap = linalg::norm(&gt) - norm_g;
        max_upper_gap = max_upper_gap.max(gap);
        assert!(gap <= 1e-10, "||G_t|| > ||g|| + 1e-10 at trial {trial}");

        // identity at and beyond the matching stepsize
        let t_hat = matching_stepsize(&problem, &x);
        let t_at = (t_hat * (1.0 + 1e-9)).max(1e-8);
        for t in [t_at, t_at * 7.3, t_at * 1e3] {
            let gt = stationarity::gradient_mapping(&problem, &x, t).unwrap();
            let diff = linalg::norm(&linalg::sub(&gt, &g));
            max_match_gap = max_match_gap.max(diff - 1e-10 * (1.0 + norm_g));
            assert!(
                diff <= 1e-10 * (1.0 + norm_g),
                "G_t != g at t = {t} >= t_hat = {t_hat}, trial {trial}"
            );
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 5.0, "runtime {dt:.2}s exceeds 5s");
    println!(
        "criterion 1 (residual relations): PASS — 1000 triples, max upper-bound slack {max_upper_gap:.2e}, max matching slack {max_match_gap:.2e}, {dt:.2}s"
    );
}

// --- criterion 2 -----------------------------------------------------------

/// Independent componentwise evaluation of the gradient mapping: the three
/// closed-form branches, reported per component for coverage accounting.
fn closed_form_component(x: f64, grad: f64, t: f64, lambda: f64) -> (f64, usize) {
    if x > (grad + lambda) / t {
        (grad + lambda, 0)
    } else if x < (grad - lambda) / t {
        (grad - lambda, 2)
    } else {
        (t * x, 1)
    }
}

#[test]
fn criterion_2_componentwise_gradient_mapping() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(202);
    // coverage over (sign of x) x (branch): 6 combinations
    let mut hit = [[0usize; 3]; 2];
    let mut max_err = 0.0f64;
    // structured inputs that pin each combination, then a random sweep
    let mut cases: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = vec![
        // x > 0: branches 0, 1, 2
        (vec![3.0], vec![1.0], 1.0, 1.0), // 3 > 2 -> branch 0
        (vec![0.5], vec![0.2], 1.0, 1.0), // |0.5 - 0.2| <= 1 -> branch 1
        (vec![0.5], vec![3.0], 1.0, 1.0), // 0.5 < 2 -> branch 2
        // x < 0: branches 0, 1, 2
        (vec![-0.5], vec![-3.0], 1.0, 1.0), // -0.5 > -2 -> branch 0
        (vec![-0.5], vec![-0.2], 1.0, 1.0), // branch 1
        (vec![-3.0], vec![-1.0], 1.0, 1.0), // -3 < -2 -> branch 2
        // x = 0 rows for completeness
        (vec![0.0], vec![3.0], 2.0, 1.0),
        (vec![0.0], vec![0.3], 2.0, 1.0),
        (vec![0.0], vec![-3.0], 2.0, 1.0),
    ];
    for _ in 0..2000 {
        let n = rng.gen_range(1..6);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let grad: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let t = 10f64.powf(rng.gen_range(-2.0..2.0));
        let lambda = rng.gen_range(0.01..2.0);
        cases.push((x, grad, t, lambda));
    }
    for (x, grad, t, lambda) in &cases {
        let via_prox = gradient_mapping_with_grad(x, grad, *t, *lambda);
        for i in 0..x.len() {
            let (want, branch) = closed_form_component(x[i], grad[i], *t, *lambda);
            let err = (via_prox[i] - want).abs();
            max_err = max_err.max(err);
            assert!(
                err <= 1e-12 * (1.0 + want.abs()),
                "branch {branch}: {} vs {want}",
                via_prox[i]
            );
            if x[i] > 0.0 {
                hit[0][branch] += 1;
            } else if x[i] < 0.0 {
                hit[1][branch] += 1;
            }
        }
    }
    for (s, row) in hit.iter().enumerate() {
        for (b, count) in row.iter().enumerate() {
            assert!(*count > 0, "branch combination ({s},{b}) never exercised");
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 1.0, "runtime {dt:.2}s exceeds 1s");
    println!(
        "criterion 2 (componentwise gradient mapping): PASS — all six branch combinations, max error {max_err:.2e}, {dt:.2}s"
    );
}

// --- criterion 3 -----------------------------------------------------------

#[test]
fn criterion_3_capped_cg_contracts() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(303);
    let mut sol_count = 0usize;
    let mut nc_count = 0usize;
    for trial in 0..500 {
        let m = rng.gen_range(2..=50);
        let eigs: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..4.0)).collect();
        let h = planted_sym(&mut rng, &eigs);
        let g: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if linalg::norm(&g) < 1e-6 {
            continue;
        }
        let eps = rng.gen_range(0.01..0.5);
        let zeta = rng.gen_range(0.1..0.99);
        let tau_bar = rng.gen_range(0.0..1.0);
        let delta = rng.gen_range(0.0..1.0);
        let params = CappedCgParams {
            eps,
            zeta,
            delta,
            tau_bar,
            m_init: 0.0,
            kappa_rule: KappaRule::Standard,
        };
        let mut op = DenseOp::new(h.clone());
        let out = capped_cg(&mut op, &g, &params).unwrap();

        // independent recomputation with dense arithmetic
        let shift = tau_bar * linalg::norm(&g).powf(delta);
        let hbar_d = {
            let mut v = h.matvec(&out.d);
            linalg::axpy(shift, &out.d, &mut v);
            v
        };
        let quad = linalg::dot(&out.d, &hbar_d);
        let nd = linalg::norm(&out.d);
        match out.kind {
            DirectionKind::Sol => {
                sol_count += 1;
                assert!(
                    quad >= eps * nd * nd * (1.0 - 1e-9),
                    "trial {trial}: curvature bound violated"
                );
                assert!(
                    nd <= 1.1 / eps * linalg::norm(&g) * (1.0 + 1e-9),
                    "trial {trial}: norm bound violated"
                );
                let mut resid = hbar_d.clone();
                linalg::axpy(1.0, &g, &mut resid);
                assert!(
                    linalg::norm(&resid) <= 0.5 * eps * zeta * nd * (1.0 + 1e-6) + 1e-12,
                    "trial {trial}: residual bound violated ({} vs {})",
                    linalg::norm(&resid),
                    0.5 * eps * zeta * nd
                );
            }
            DirectionKind::Nc => {
                nc_count += 1;
                assert!(
                    quad / (nd * nd) < eps,
                    "trial {trial}: NC Rayleigh quotient {} not below eps {eps}",
                    quad / (nd * nd)
                );
            }
        }
    }

    // shifted-PSD instances always produce a solution
    for trial in 0..100 {
        let m = rng.gen_range(2..=30);
        let tau_bar: f64 = rng.gen_range(0.3..1.0);
        let eps = rng.gen_range(0.01..0.2);
        let eigs: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.1..3.0)).collect();
        let h = planted_sym(&mut rng, &eigs);
        let g: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm_g = linalg::norm(&g);
        if norm_g < 1e-6 {
            continue;
        }
        let shift = tau_bar * norm_g; // delta = 1
        let shifted =
            DenseMat::from_fn(m, m, |i, j| h.get(i, j) + if i == j { shift } else { 0.0 });
        let min_eig = linalg::sym_min_eig(&shifted).unwrap();
        if min_eig < eps * 1.05 {
            continue; // not in the verified-PSD regime
        }
        let params = CappedCgParams {
            eps,
            zeta: 0.5,
            delta: 1.0,
            tau_bar,
            m_init: 0.0,
            kappa_rule: KappaRule::Standard,
        };
        let mut op = DenseOp::new(h);
        let out = capped_cg(&mut op, &g, &params).unwrap();
        assert_eq!(
            out.kind,
            DirectionKind::Sol,
            "trial {trial}: PSD-shifted instance returned NC"
        );
    }

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 30.0, "runtime {dt:.2}s exceeds 30s");
    println!(
        "criterion 3 (capped CG contracts): PASS — 500 mixed instances ({sol_count} SOL / {nc_count} NC) plus PSD-shifted sweep, {dt:.2}s"
    );
}

// --- criterion 4 -----------------------------------------------------------

#[test]
fn criterion_4_meo_statistical_contract() {
    let start = Instant::now();
    let m = 60;
    let eps = 0.1;
    let sigma = 0.05;
    let mut rng = ChaCha20Rng::seed_from_u64(404);
    let mut found = 0usize;
    let trials = 400;
    for _ in 0..trials {
        let mut eigs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        eigs[0] = -2.0 * eps * (1.0 + rng.gen_range(0.0..0.5)); // planted <= -2 eps
        let h = planted_sym(&mut rng, &eigs);
        let mut op = DenseOp::new(h.clone());
        match meo(&mut op, eps, sigma, None, &mut rng).unwrap() {
            MeoOutcome::NegativeCurvature { lambda_hat, v, .. } => {
                found += 1;
                assert!(
                    (linalg::norm(&v) - 1.0).abs() <= 1e-10,
                    "returned direction is not unit"
                );
                let hv = h.matvec(&v);
                let rayleigh = linalg::dot(&v, &hv);
                assert!(
                    (rayleigh - lambda_hat).abs() <= 1e-10 * (1.0 + lambda_hat.abs()),
                    "reported estimate does not equal the Rayleigh quotient"
                );
                assert!(rayleigh <= -0.5 * eps, "direction does not clear -eps/2");
            }
            MeoOutcome::Certificate { .. } => {}
        }
    }
    let frac = found as f64 / trials as f64;
    assert!(
        frac >= 0.92,
        "negative curvature found in only {found}/{trials} trials"
    );
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 30.0, "runtime {dt:.2}s exceeds 30s");
    println!(
        "criterion 4 (MEO statistical contract): PASS — {found}/{trials} detections ({:.1}%), {dt:.2}s",
        100.0 * frac
    );
}

// --- criterion 5 -----------------------------------------------------------

#[test]
fn criterion_5_toy_analytic_values() {
    let start = Instant::now();
    let problem = toy_problem();
    let known = toy_known_points();
    let x0 = known.saddle_like;

    let g = subgradient_residual(&problem, &x0);
    for (gi, want) in g.iter().zip(&known.residual_at_saddle) {
        assert!((gi - want).abs() <= 1e-12, "residual {g:?}");
    }

    let part = partition(&x0, TOY_EPS_G, SIGN_THRESHOLD_DEFAULT);
    let s = scaling(&x0, TOY_EPS_G);
    let mut op = restricted_scaled_operator(&problem, &x0, &part.i_neq0, &s).unwrap();
    let dense = linalg::materialize_sym(&mut op);
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j {
                known.restricted_hessian_at_saddle[i]
            } else {
                0.0
            };
            assert!((dense.get(i, j) - want).abs() <= 1e-12);
        }
    }

    // minimum eigenvalue by both the randomized oracle and the dense path
    let mut op = restricted_scaled_operator(&problem, &x0, &part.i_neq0, &s).unwrap();
    let (lam_dense, _) = dense_min_eigpair(&mut op).unwrap();
    assert!((lam_dense - known.scaled_min_eig_at_saddle).abs() <= 1e-8);
    let mut rng = ChaCha20Rng::seed_from_u64(505);
    let mut op = restricted_scaled_operator(&problem, &x0, &part.i_neq0, &s).unwrap();
    let lam_meo = match meo(&mut op, 0.01, 0.05, None, &mut rng).unwrap() {
        MeoOutcome::NegativeCurvature { lambda_hat, .. } => lambda_hat,
        MeoOutcome::Certificate { .. } => panic!("curvature -4 must be detected"),
    };
    assert!((lam_meo - known.scaled_min_eig_at_saddle).abs() <= 1e-8);

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 1.0, "runtime {dt:.2}s exceeds 1s");
    println!(
        "criterion 5 (toy analytic values): PASS — residual matches to 1e-12, restricted Hessian diag(-4,-4), min eig {lam_meo:.9} (oracle) / {lam_dense:.9} (dense), {dt:.2}s"
    );
}

// --- criterion 6 -----------------------------------------------------------

#[test]
fn criterion_6_toy_escape() {
    let start = Instant::now();
    let problem = toy_problem();
    let known = toy_known_points();
    let x0 = known.saddle_like;

    let ch = toy_hpgncm_config();
    let rh = hpgncm_solve(&problem, &x0, &ch).unwrap();
    assert_eq!(
        rh.status,
        SolveStatus::StrongStarSecondOrder,
        "{:?}",
        rh.status
    );
    let dh = dist(&rh.final_x, &known.optimum);
    assert!(dh <= 1e-2, "hybrid solver ended {dh:.3e} from the optimum");
    validate_trace(&rh.trace, &ch).unwrap();

    let cp = toy_pgn2cm_config();
    let rp = pgn2cm_solve(&problem, &x0, &cp).unwrap();
    assert_eq!(rp.status, SolveStatus::WeakSecondOrder, "{:?}", rp.status);
    let dp = dist(&rp.final_x, &known.optimum);
    assert!(
        dp <= 1e-2,
        "Newton-CG solver ended {dp:.3e} from the optimum"
    );
    validate_trace(&rp.trace, &cp).unwrap();

    // first-phase variant from the rate-study start reaches (1, -1, 0)
    let cf = toy_pgn2cm_config();
    let rf = fpgn2cm_solve(
        &problem,
        &RATE_STUDY_START,
        &cf,
        ConvexityMode::Nonconvex,
        1000,
    )
    .unwrap();
    let df = dist(&rf.final_x, &known.second_order);
    assert!(df <= 1e-3, "first phase ended {df:.3e} from (1,-1,0)");

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "runtime {dt:.2}s exceeds 10s");
    println!(
        "criterion 6 (toy escape): PASS — hybrid {dh:.2e} ({} iters), Newton-CG {dp:.2e} ({} iters) from the optimum, first phase {df:.2e} from (1,-1,0), {dt:.2}s",
        rh.iterations, rp.iterations
    );
}

// --- criterion 7 -----------------------------------------------------------

#[test]
fn criterion_7_line_search_ledger() {
    let start = Instant::now();
    let problem = toy_problem();
    let known = toy_known_points();
    let mut rows = 0usize;

    let ch = toy_hpgncm_config();
    let rh = hpgncm_solve(&problem, &known.saddle_like, &ch).unwrap();
    validate_trace(&rh.trace, &ch).unwrap();
    rows += rh.trace.len();

    let cp = toy_pgn2cm_config();
    let rp = pgn2cm_solve(&problem, &known.saddle_like, &cp).unwrap();
    validate_trace(&rp.trace, &cp).unwrap();
    rows += rp.trace.len();

    let rf = fpgn2cm_solve(
        &problem,
        &RATE_STUDY_START,
        &cp,
        ConvexityMode::Nonconvex,
        1000,
    )
    .unwrap();
    validate_trace(&rf.trace, &cp).unwrap();
    rows += rf.trace.len();

    let rg = fpgncm_solve(&problem, &RATE_STUDY_START, &ch, 1000).unwrap();
    validate_trace(&rg.trace, &ch).unwrap();
    rows += rg.trace.len();

    // a convex instance exercising proximal and Newton solution steps
    let spectrum = [0.2, 0.4, 0.9, 1.6, 2.5, 3.2];
    let q = random_l1_quadratic(6, &spectrum, 0.15, 777).unwrap();
    let mut cq = SolverConfig::new(1e-6);
    cq.rng_seed = 9;
    let rq = pgn2cm_solve(&q, &[0.9, -0.8, 0.7, -0.6, 0.5, -0.4], &cq).unwrap();
    assert!(rq.status.is_certificate());
    validate_trace(&rq.trace, &cq).unwrap();
    rows += rq.trace.len();

    // a start inside the toy's concave band, where the restricted Newton
    // system itself exposes negative curvature
    let rn = pgn2cm_solve(&problem, &[2.2, -2.2, 0.0], &cp).unwrap();
    assert!(rn.status.is_certificate());
    validate_trace(&rn.trace, &cp).unwrap();
    rows += rn.trace.len();

    // every step kind appears somewhere in the collected traces
    use l1c_core::trace::StepKind;
    let all: Vec<&l1c_core::trace::IterationTrace> = rh
        .trace
        .iter()
        .chain(&rp.trace)
        .chain(&rf.trace)
        .chain(&rg.trace)
        .chain(&rq.trace)
        .chain(&rn.trace)
        .collect();
    for kind in [
        StepKind::ProxG,
        StepKind::NewtonCgSol,
        StepKind::NewtonCgNc,
        StepKind::MeoNc,
    ] {
        assert!(
            all.iter().any(|r| r.step_kind == kind),
            "step kind {kind:?} never exercised"
        );
    }

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 5.0, "runtime {dt:.2}s exceeds 5s");
    println!(
        "criterion 7 (line-search ledger): PASS — {rows} trace rows re-verified against their exact inequalities, {dt:.2}s"
    );
}

// --- criterion 8 -----------------------------------------------------------

#[test]
fn criterion_8_student_t_desk_scale() {
    let start = Instant::now();
    let eps_g = 1e-4;
    let trials = 5;
    let mut h_iters = Vec::new();
    let mut p_iters = Vec::new();
    let mut h_fvals = Vec::new();
    let mut p_fvals = Vec::new();

    for trial in 0..trials {
        let spec = SignalSpec::new(256, 20.0, 9000 + trial).unwrap();
        let (problem, _) = build_student_t(&spec).unwrap();
        let x0 = vec![0.0; 256];

        let mut cp = student_t_pgn2cm_config(eps_g);
        cp.eps_h = 1e-2;
        cp.max_iters = 500_000;
        cp.rng_seed = 40 + trial;
        let rp = pgn2cm_solve(&problem, &x0, &cp).unwrap();
        assert_eq!(
            rp.status,
            SolveStatus::WeakSecondOrder,
            "trial {trial} did not certify"
        );
        assert!(rp.iterations < 500_000);
        let geps = relaxed_residual(&problem, &rp.final_x, eps_g);
        assert!(
            linalg::norm(&geps) <= eps_g,
            "trial {trial}: relaxed residual {} above eps_g",
            linalg::norm(&geps)
        );
        // certificate check: scaled restricted curvature above -eps_h
        let part = partition(&rp.final_x, eps_g, SIGN_THRESHOLD_DEFAULT);
        assert!(!part.i_neq0.is_empty());
        let s = scaling(&rp.final_x, eps_g);
        let mut op = restricted_scaled_operator(&problem, &rp.final_x, &part.i_neq0, &s).unwrap();
        let (lam_shs, _) = dense_min_eigpair(&mut op).unwrap();
        assert!(
            lam_shs >= -cp.eps_h,
            "trial {trial}: scaled curvature {lam_shs} below -eps_h"
        );
        validate_trace(&rp.trace, &cp).unwrap();
        p_iters.push(rp.iterations as f64);
        p_fvals.push(rp.final_objective);

        let mut chh = student_t_hpgncm_config(eps_g);
        chh.eps_h = 1e-2;
        chh.max_iters = 500_000;
        chh.rng_seed = 40 + trial;
        let rh = hpgncm_solve(&problem, &x0, &chh).unwrap();
        validate_trace(&rh.trace, &chh).unwrap();
        h_iters.push(rh.iterations as f64);
        h_fvals.push(rh.final_objective);
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mean_h = mean(&h_iters);
    let mean_p = mean(&p_iters);
    assert!(
        mean_p < mean_h,
        "Newton-CG mean iterations {mean_p} not below hybrid mean {mean_h}"
    );

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 600.0, "runtime {dt:.2}s exceeds 10min");
    println!(
        "criterion 8 (regression desk scale): PASS — mean iters {:.0} (pgn2cm) vs {:.0} (hpgncm); mean objective {:.3} vs {:.3}; all 5 Newton-CG runs certified, {dt:.1}s",
        mean_p, mean_h, mean(&p_fvals), mean(&h_fvals)
    );
}

// --- criterion 9 -----------------------------------------------------------

#[test]
fn criterion_9_superlinear_rate_diagnostic() {
    let start = Instant::now();
    let problem = toy_problem();
    let cf = toy_pgn2cm_config();
    let report = fpgn2cm_solve(
        &problem,
        &RATE_STUDY_START,
        &cf,
        ConvexityMode::Nonconvex,
        1000,
    )
    .unwrap();
    let xbar = report.final_x.clone();
    let dists: Vec<f64> = report.iterates.iter().map(|x| dist(x, &xbar)).collect();
    let mut ratios = Vec::new();
    for w in dists.windows(2) {
        if w[0] > 1e-13 && w[1] > 0.0 {
            ratios.push(w[1] / w[0]);
        }
    }
    assert!(ratios.len() >= 5, "only {} usable ratios", ratios.len());
    let last5 = &ratios[ratios.len() - 5..];
    for w in last5.windows(2) {
        assert!(
            w[1] < w[0],
            "error ratios not strictly decreasing: {last5:?}"
        );
    }
    assert!(
        last5[4] < 0.1,
        "final contraction ratio {} not below 0.1",
        last5[4]
    );
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 5.0, "runtime {dt:.2}s exceeds 5s");
    println!(
        "criterion 9 (superlinear rate diagnostic): PASS — last five error ratios {last5:?}, {dt:.2}s"
    );
}

// --- criterion 10 ----------------------------------------------------------

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

#[test]
fn criterion_10_scaling_diagnostic() {
    let start = Instant::now();
    let n = 24;
    let spectrum: Vec<f64> = (0..n)
        .map(|i| 1e-2 * (10.0f64 / 1e-2).powf(i as f64 / (n - 1) as f64))
        .collect();
    let problem = random_l1_quadratic(n, &spectrum, 0.3, 4242).unwrap();
    let x0 = vec![0.0; n];
    let grid = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

    let mut ln_eps = Vec::new();
    let mut ln_h = Vec::new();
    let mut ln_p = Vec::new();
    for (k, &eps) in grid.iter().enumerate() {
        let mut ch = SolverConfig::new(eps);
        ch.rng_seed = 100 + k as u64;
        ch.max_iters = 200_000;
        let rh = hpgncm_solve(&problem, &x0, &ch).unwrap();
        assert!(rh.status.is_certificate(), "hybrid failed at eps {eps}");

        let mut cp = SolverConfig::new(eps);
        cp.rng_seed = 100 + k as u64;
        cp.max_iters = 200_000;
        let rp = pgn2cm_solve(&problem, &x0, &cp).unwrap();
        assert!(rp.status.is_certificate(), "Newton-CG failed at eps {eps}");

        ln_eps.push(eps.ln());
        ln_h.push((rh.iterations.max(1) as f64).ln());
        ln_p.push((rp.iterations.max(1) as f64).ln());
    }
    let slope_h = fit_slope(&ln_eps, &ln_h);
    let slope_p = fit_slope(&ln_eps, &ln_p);
    assert!(
        slope_p.abs() <= slope_h.abs(),
        "slope ordering violated: |{slope_p:.3}| > |{slope_h:.3}|"
    );
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 120.0, "runtime {dt:.2}s exceeds 2min");
    println!(
        "criterion 10 (scaling diagnostic): PASS — log-log slopes {slope_p:.3} (pgn2cm) vs {slope_h:.3} (hpgncm) over eps grid {grid:?}, {dt:.1}s"
    );
}
