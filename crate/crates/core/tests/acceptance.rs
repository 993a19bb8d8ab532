//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Several reference values bundled with the benchmark studies are
//! *inconsistent with the system data they accompany*; the corresponding
//! assertions are kept at their stated thresholds and fail by design,
//! documenting the discrepancy (details in the test comments and in each
//! failure message). Everything else passes at the stated tolerances.

use std::time::Instant;

use nalgebra::DMatrix;
use specctrl_core::linalg::{self, complexify, C64, CMatrix, CVector};
use specctrl_core::plants::{
    self, build_toy_with_delta, interconnect, oracle_eigs, pade_exp, rational_diffusion,
    to_spectral, OdePdePlant, PlantKind,
};
use specctrl_core::sim::{
    self, assemble, default_initial_state, fit_decay, fraction_stable, propagate,
    uncertainty_sweep, SweepConfig, VWeights,
};
use specctrl_core::spectral::SpectralModel;
use specctrl_core::synthesis::{
    assemble_controller, certify_exact, certify_uncertain, f0_matrix, lyapunov_pair,
    place_observer, place_poles, realify, Gains, UncertaintySpec,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn check(name: &str, ok: bool, detail: &str) {
    if ok {
        println!("acceptance {name}: PASS ({detail})");
    } else {
        println!("acceptance {name}: FAIL ({detail})");
        panic!("acceptance {name}: {detail}");
    }
}

fn transport_plant() -> OdePdePlant {
    OdePdePlant {
        a: DMatrix::from_element(1, 1, 1.0),
        b: DMatrix::from_element(1, 1, -2.0),
        bu: DMatrix::from_element(1, 1, 1.0),
        c: DMatrix::from_element(1, 1, 1.0),
        cy: DMatrix::from_element(1, 1, 1.0),
        kind: PlantKind::Transport { h: 0.7 },
    }
}

fn diffusion_plant() -> OdePdePlant {
    OdePdePlant {
        a: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -4.0, -4.0]),
        b: DMatrix::from_row_slice(2, 1, &[0.0, 3.0]),
        bu: DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        c: DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        cy: DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        kind: PlantKind::ReactionDiffusion { nu: 1.0, lambda: 1.0 },
    }
}

fn transport_model(extra_stable: usize, n_tail: usize) -> SpectralModel {
    let plant = transport_plant();
    let r = pade_exp(10, 0.7).unwrap();
    let (a, b, cm) = interconnect(&plant, &r).unwrap();
    to_spectral(&a, &b, &cm, 0.5, extra_stable, n_tail).unwrap()
}

fn diffusion_model(delta: f64, extra_stable: usize, n_tail: usize) -> SpectralModel {
    let plant = diffusion_plant();
    let r = rational_diffusion(10, 1.0, 1.0).unwrap();
    let (a, b, cm) = interconnect(&plant, &r).unwrap();
    to_spectral(&a, &b, &cm, delta, extra_stable, n_tail).unwrap()
}

fn gains_for(model: &SpectralModel, ctrl_poles: &[C64], obs_poles: &[C64]) -> Gains {
    Gains {
        k0: place_poles(&model.a0, &model.b0, ctrl_poles).unwrap(),
        g0: place_observer(&model.a0, &model.c0, obs_poles).unwrap(),
        desired_controller_poles: ctrl_poles.to_vec(),
        desired_observer_poles: obs_poles.to_vec(),
    }
}

fn zero_gains(model: &SpectralModel) -> Gains {
    Gains {
        k0: CMatrix::zeros(model.n_u(), model.n0()),
        g0: CMatrix::zeros(model.n0(), model.n_y()),
        desired_controller_poles: Vec::new(),
        desired_observer_poles: Vec::new(),
    }
}

fn closed_loop_fit(model: &SpectralModel, gains: &Gains, t_end: f64) -> (f64, sim::DecayFit) {
    let ctrl = assemble_controller(model, gains, None).unwrap();
    let sys = assemble(model, &ctrl, None).unwrap();
    let (_, sbar) = linalg::sigma_bounds(&sys.acl).unwrap();
    let x0 = default_initial_state(&sys.labels);
    let traj = propagate(&sys, &x0, t_end, 0.01, None, false).unwrap();
    (sbar, fit_decay(&traj, 0.5).unwrap())
}

/// Criterion 1: transport spectral reproduction at N = 10, h = 0.7.
#[test]
fn criterion_1_transport_spectral_reproduction() {
    let t0 = Instant::now();
    let model = transport_model(0, 9);
    // reference modal data for the rightmost pair
    let s_ref = [c(0.1863, 1.5555), c(0.1863, -1.5555)];
    let b_ref = [c(0.1239, -0.3596), c(0.1239, 0.3596)];
    let cc_ref = [c(2.2437, 0.1003), c(2.2437, -0.1003)];
    let mut eig_err: f64 = 0.0;
    let mut entry_err: f64 = 0.0;
    let mut prod_err: f64 = 0.0;
    for k in 0..2 {
        // match by eigenvalue
        let target = s_ref[k];
        let idx = (0..2)
            .min_by(|&i, &j| {
                (model.a0[(i, i)] - target)
                    .norm()
                    .partial_cmp(&(model.a0[(j, j)] - target).norm())
                    .unwrap()
            })
            .unwrap();
        eig_err = eig_err.max((model.a0[(idx, idx)] - target).norm());
        entry_err = entry_err
            .max((model.b0[(idx, 0)] - b_ref[k]).norm())
            .max((model.c0[(0, idx)] - cc_ref[k]).norm());
        let prod = model.b0[(idx, 0)] * model.c0[(0, idx)];
        prod_err = prod_err.max((prod - b_ref[k] * cc_ref[k]).norm());
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let detail = format!(
        "eig err {eig_err:.2e}, entry err {entry_err:.2e}, product err {prod_err:.2e}, {elapsed:.3}s"
    );
    // entries are realization-scaling dependent; the product fallback applies
    let ok = eig_err < 1e-3 && (entry_err < 1e-3 || prod_err < 1e-3) && elapsed < 1.0;
    check("1 transport spectral reproduction", ok, &detail);
}

/// Criterion 2a: reaction-diffusion reference modal values.
///
/// The bundled reference values (rightmost mode 0.2483 with coefficients
/// 0.0233 / 1.9172 and stable pair -1.5811 +- 1.5285i) are not reproducible
/// from the bundled system data: the interconnection's characteristic
/// function det(sI - A - H(s)BC), H = q/sinh q, q = sqrt((s-1)), evaluated at
/// those eigenvalues is bounded away from zero for every sign and
/// boundary-orientation convention, and a grid of alternative (A, B, C,
/// lambda, nu) fits confirms no nearby system produces them. The
/// finite-difference oracle and the rational route below agree with each
/// other (criterion 2b) on the actual spectrum: rightmost ~ -0.0956.
#[test]
fn criterion_2a_diffusion_reference_values() {
    let model = diffusion_model(1.0, 2, 9);
    let a0_err = (model.a0[(0, 0)] - c(0.2483, 0.0)).norm();
    let pair_target = c(-1.5811, 1.5285);
    let pair_err = (0..model.n1_dim())
        .map(|i| (model.a1[(i, i)] - pair_target).norm().min(
            (model.a1[(i, i)] - pair_target.conj()).norm(),
        ))
        .fold(f64::INFINITY, f64::min);
    let prod = model.b0[(0, 0)] * model.c0[(0, 0)];
    let prod_ref = c(0.0233, 0.0) * c(1.9172, 0.0);
    let prod_err = (prod - prod_ref).norm();
    let detail = format!(
        "A0 err {a0_err:.3} (model A0 = {:.4}), A1 pair err {pair_err:.3}, product err {prod_err:.3}",
        model.a0[(0, 0)].re
    );
    let ok = a0_err < 1e-3 && pair_err < 1e-3 && prod_err < 1e-3;
    check("2a diffusion reference values", ok, &detail);
}

/// Criterion 2b: the finite-difference oracle at resolution 400 agrees with
/// the rational route on the unstable block and the retained stable pair.
#[test]
fn criterion_2b_diffusion_oracle_cross_check() {
    let t0 = Instant::now();
    let model = diffusion_model(1.0, 2, 9);
    let plant = diffusion_plant();
    let oracle = oracle_eigs(&plant, 400, 3).unwrap();
    let mut worst: f64 = (model.a0[(0, 0)] - oracle[0]).norm();
    for i in 0..model.n1_dim() {
        let best = oracle[1..3]
            .iter()
            .map(|o| (model.a1[(i, i)] - *o).norm())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let detail = format!("worst |model - oracle| = {worst:.2e}, {elapsed:.2}s");
    check("2b diffusion oracle cross-check", worst < 1e-3 && elapsed < 10.0, &detail);
}

fn toy_certificate(n1: usize) -> specctrl_core::Certificate {
    // delta = 0.4: the placed poles sit at Re = -0.5, so the shifted Lyapunov
    // solve needs delta strictly below 0.5
    let model = build_toy_with_delta(n1, 200, 0.4).unwrap();
    let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
    let gains = gains_for(&model, &poles, &poles);
    let pair = lyapunov_pair(&model, &gains).unwrap();
    certify_exact(&model, &gains, &pair.p0, &pair.p1).unwrap()
}

/// Criterion 3 (low orders): the certificate rejects n1 in {0, 1}.
#[test]
fn criterion_3_low_orders_unsatisfied() {
    let mut details = Vec::new();
    let mut ok = true;
    for n1 in [0usize, 1] {
        let t0 = Instant::now();
        let cert = toy_certificate(n1);
        let el = t0.elapsed().as_secs_f64();
        ok &= !cert.satisfied && el < 1.0;
        details.push(format!("n1={n1}: rho={:.3e} sat={} {el:.2}s", cert.rho, cert.satisfied));
    }
    check("3 toy certificate low orders unsatisfied", ok, &details.join("; "));
}

/// Criterion 3 (orders >= 2): the reference claims the certificate accepts
/// n1 in {2, 3, 4}.
///
/// With the unit tail coefficients (b_i = c_i = 1 for all i) the series
/// sum |b_i K0|^2 and sum c_i* W c_i grow linearly in the stored tail and
/// rho_n >= 16 S_b |[-G0;G0]|^2 N / (delta^2 (m - delta) m) > 50 already for
/// a single tail mode, for every feasible (delta, P0). The condition is
/// therefore unsatisfiable for this benchmark at any retained order; with
/// N_tail = 200 the computed rho is ~1e6..1e8 and the certificate honestly
/// reports unsatisfied (with the tail flagged inconclusive, since the unit
/// series does not converge).
#[test]
fn criterion_3_orders_two_plus_satisfied() {
    let mut details = Vec::new();
    let mut ok = true;
    for n1 in [2usize, 3, 4] {
        let t0 = Instant::now();
        let cert = toy_certificate(n1);
        let el = t0.elapsed().as_secs_f64();
        ok &= cert.satisfied && el < 1.0;
        details.push(format!(
            "n1={n1}: rho={:.3e} sat={} inconclusive={} {el:.2}s",
            cert.rho, cert.satisfied, cert.tail_inconclusive
        ));
    }
    check("3 toy certificate orders >= 2 satisfied", ok, &details.join("; "));
}

/// Criterion 4: the toy closed loop at N_tail = 200 should decay at rate
/// >= 0.45 with monotone V.
///
/// The reference behavior is not attainable: the unit-coefficient tail
/// couples back through the observer strongly enough to destabilize the
/// design (rightmost closed-loop eigenvalue +0.68 / +0.54 / +0.44 for
/// n1 = 2 / 3 / 4, confirmed independently by a loop-transfer zero check),
/// so the fitted rates are negative and V grows.
#[test]
fn criterion_4_toy_closed_loop_decay() {
    let mut details = Vec::new();
    let mut ok = true;
    for n1 in [2usize, 3, 4] {
        let t0 = Instant::now();
        let model = build_toy_with_delta(n1, 200, 0.4).unwrap();
        let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
        let gains = gains_for(&model, &poles, &poles);
        let pair = lyapunov_pair(&model, &gains).unwrap();
        let cert = certify_exact(&model, &gains, &pair.p0, &pair.p1).unwrap();
        let w = VWeights::from_certificate(&cert, &pair);
        let ctrl = assemble_controller(&model, &gains, None).unwrap();
        let sys = assemble(&model, &ctrl, None).unwrap();
        let x0 = default_initial_state(&sys.labels);
        let traj = propagate(&sys, &x0, 20.0, 0.01, Some(&w), false).unwrap();
        let fit = fit_decay(&traj, 0.5).unwrap();
        let v_monotone = traj
            .norms
            .windows(2)
            .all(|p| p[1].v <= p[0].v * (1.0 + 1e-6));
        let el = t0.elapsed().as_secs_f64();
        ok &= fit.rate >= 0.45 && v_monotone && el < 5.0;
        details.push(format!(
            "n1={n1}: rate={:.3} V monotone={v_monotone} {el:.2}s",
            fit.rate
        ));
    }
    check("4 toy closed-loop decay", ok, &details.join("; "));
}

/// Criterion 5: 50 seeded uncertainty trials at magnitude 0.1, n1 = 4.
///
/// Unattainable for the same reason as criterion 4: the nominal toy closed
/// loop is already unstable at N_tail = 200, and magnitude-0.1 perturbations
/// do not recover stability, so the stable fraction is 0, not 1.
#[test]
fn criterion_5_toy_uncertainty_sweep() {
    let t0 = Instant::now();
    let model = build_toy_with_delta(4, 200, 0.4).unwrap();
    let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
    let gains = gains_for(&model, &poles, &poles);
    let cfg = SweepConfig {
        magnitude: 0.1,
        trials: 50,
        seed: 2024,
        t_end: 10.0,
        dt: 0.02,
    };
    let trials = uncertainty_sweep(&model, &gains, &cfg).unwrap();
    let frac = fraction_stable(&trials);
    let all_neg = trials.iter().all(|t| t.sigma_bar < 0.0);
    let elapsed = t0.elapsed().as_secs_f64();
    let detail = format!("fraction stable = {frac:.2}, all sigma_bar<0 = {all_neg}, {elapsed:.1}s");
    check(
        "5 toy uncertainty sweep all stable",
        (frac - 1.0).abs() < f64::EPSILON && all_neg && elapsed < 30.0,
        &detail,
    );
}

/// Criterion 6: transport open loop diverges at ~0.186; the closed loop with
/// poles at -0.5 +- i decays at a rate in [0.45, 0.60].
#[test]
fn criterion_6_transport_open_and_closed() {
    let t0 = Instant::now();
    let model = transport_model(0, 9);
    let (_, open_fit) = closed_loop_fit(&model, &zero_gains(&model), 20.0);
    let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
    let gains = gains_for(&model, &poles, &poles);
    let (sbar, closed_fit) = closed_loop_fit(&model, &gains, 20.0);
    let elapsed = t0.elapsed().as_secs_f64();
    let detail = format!(
        "open rate {:.4} (want -0.186 +- 0.02), closed rate {:.4} in [0.45,0.60], sigma_bar {sbar:.3}, {elapsed:.1}s",
        open_fit.rate, closed_fit.rate
    );
    let ok = (open_fit.rate + 0.186).abs() < 0.02
        && closed_fit.rate >= 0.45
        && closed_fit.rate <= 0.60
        && elapsed < 5.0;
    check("6 transport open/closed rates", ok, &detail);
}

/// Criterion 7a: reaction-diffusion open-loop divergence at 0.2483 +- 0.01.
///
/// Ties to the criterion-2a discrepancy: the actual coupled system is
/// (weakly) stable with rightmost eigenvalue ~ -0.0956, so the open loop
/// decays at ~0.096 instead of diverging at 0.2483.
#[test]
fn criterion_7a_diffusion_open_loop_divergence() {
    let model = diffusion_model(1.0, 2, 9);
    let (_, open_fit) = closed_loop_fit(&model, &zero_gains(&model), 20.0);
    let detail = format!("open rate {:.4}, reference -0.2483 +- 0.01", open_fit.rate);
    check(
        "7a diffusion open-loop divergence",
        (open_fit.rate + 0.2483).abs() < 0.01,
        &detail,
    );
}

/// Criterion 7b: closing the loop with scalar gains that move the rightmost
/// mode (and its observer copy) to -1 yields fitted rate >= 0.5 for
/// n1 in {0, 2}.
#[test]
fn criterion_7b_diffusion_closed_loop() {
    let t0 = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for (n1, n_tail) in [(0usize, 11usize), (2, 9)] {
        let model = diffusion_model(1.0, n1, n_tail);
        let target = vec![c(-1.0, 0.0)];
        let gains = gains_for(&model, &target, &target);
        let (sbar, fit) = closed_loop_fit(&model, &gains, 20.0);
        ok &= fit.rate >= 0.5;
        details.push(format!("n1={n1}: rate={:.3} sigma_bar={sbar:.3}", fit.rate));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    ok &= elapsed < 10.0;
    details.push(format!("{elapsed:.1}s"));
    check("7b diffusion closed loop", ok, &details.join("; "));
}

/// Criterion 8: shifted-Lyapunov residuals on 100 random Hurwitz-shifted
/// matrices stay below 1e-10.
#[test]
fn criterion_8_lyapunov_residuals() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=8);
        let delta = rng.gen_range(0.05..1.0);
        let mut f = CMatrix::from_fn(n, n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let (_, hi) = linalg::sigma_bounds(&f).unwrap();
        // shift left so sigma_bar(F) < -delta with a healthy margin
        let shift = hi + delta + rng.gen_range(0.3..1.5);
        for i in 0..n {
            f[(i, i)] -= c(shift, 0.0);
        }
        let p = linalg::solve_shifted_lyapunov(&f, delta).unwrap();
        worst = worst.max(linalg::lyapunov_residual(&p, &f, delta));
        assert!(linalg::hermitian_min(&p) > 0.0, "P not positive definite");
        let herm = (&p - p.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(herm < 1e-12, "P not Hermitian: {herm}");
    }
    check(
        "8 shifted-Lyapunov residuals",
        worst <= 1e-10,
        &format!("worst residual {worst:.2e} over 100 draws"),
    );
}

/// Criterion 8: pole placement accuracy 1e-8 on 100 random SISO pairs.
#[test]
fn criterion_8_pole_placement_accuracy() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let mut done = 0;
    let mut worst: f64 = 0.0;
    while done < 100 {
        let n = rng.gen_range(1..=6);
        let a = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), 0.0));
        let b = CMatrix::from_fn(n, 1, |_, _| c(rng.gen_range(-1.0..1.0), 0.0));
        let mut poles = Vec::new();
        while poles.len() < n {
            if n - poles.len() >= 2 && rng.gen_bool(0.5) {
                let re = rng.gen_range(-3.0..-0.2);
                let im = rng.gen_range(0.1..2.0);
                poles.push(c(re, im));
                poles.push(c(re, -im));
            } else {
                poles.push(c(rng.gen_range(-3.0..-0.2), 0.0));
            }
        }
        let k = match place_poles(&a, &b, &poles) {
            Ok(k) => k,
            Err(_) => continue,
        };
        let g = match place_observer(&a, &b.transpose(), &poles) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let acl_k = &a + &b * &k;
        let acl_g = &a + &g * &b.transpose();
        for p in &poles {
            for m in [&acl_k, &acl_g] {
                let mut shifted = (*m).clone();
                for i in 0..n {
                    shifted[(i, i)] -= *p;
                }
                let smin = linalg::smallest_singular_value(&shifted)
                    / linalg::max_abs(m).max(1.0);
                worst = worst.max(smin);
            }
        }
        done += 1;
    }
    check(
        "8 pole placement accuracy",
        worst < 1e-8,
        &format!("worst placement defect {worst:.2e} over 100 pairs"),
    );
}

/// Criterion 8: propagator group property (dt vs two half steps) to 1e-10.
#[test]
fn criterion_8_propagator_group_property() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.gen_range(5..=50);
        let mut a = CMatrix::from_fn(n, n, |_, _| {
            c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
        });
        for i in 0..n {
            a[(i, i)] -= c(2.0, 0.0);
        }
        let dt = rng.gen_range(0.05..0.5);
        let full = linalg::expm(&(&a * c(dt, 0.0)));
        let half = linalg::expm(&(&a * c(dt / 2.0, 0.0)));
        let twice = &half * &half;
        worst = worst.max((&full - &twice).norm() / full.norm());
    }
    check(
        "8 propagator group property",
        worst < 1e-10,
        &format!("worst relative defect {worst:.2e}"),
    );
}

/// Criterion 8: the Lyapunov sandwich holds at every sample of certified
/// trajectories for all three plants.
#[test]
fn criterion_8_lyapunov_sandwich() {
    let mut checked = 0usize;
    // toy designs (delta = 0.4 certificates)
    for n1 in [2usize, 3, 4] {
        let model = build_toy_with_delta(n1, 200, 0.4).unwrap();
        let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
        let gains = gains_for(&model, &poles, &poles);
        checked += sandwich_samples(&model, &gains);
    }
    // transport with a certificate margin (delta = 0.45 < 0.5)
    {
        let plant = transport_plant();
        let r = pade_exp(10, 0.7).unwrap();
        let (a, b, cm) = interconnect(&plant, &r).unwrap();
        let model = to_spectral(&a, &b, &cm, 0.45, 0, 9).unwrap();
        let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
        let gains = gains_for(&model, &poles, &poles);
        checked += sandwich_samples(&model, &gains);
    }
    // reaction-diffusion with delta = 0.95 and poles at -1
    {
        let plant = diffusion_plant();
        let r = rational_diffusion(10, 1.0, 1.0).unwrap();
        let (a, b, cm) = interconnect(&plant, &r).unwrap();
        let model = to_spectral(&a, &b, &cm, 0.95, 2, 9).unwrap();
        let target = vec![c(-1.0, 0.0)];
        let gains = gains_for(&model, &target, &target);
        checked += sandwich_samples(&model, &gains);
    }
    check(
        "8 Lyapunov sandwich",
        checked > 0,
        &format!("{checked} samples verified across three plants"),
    );
}

fn sandwich_samples(model: &SpectralModel, gains: &Gains) -> usize {
    let pair = lyapunov_pair(model, gains).unwrap();
    let cert = certify_exact(model, gains, &pair.p0, &pair.p1).unwrap();
    let w = VWeights::from_certificate(&cert, &pair);
    let ctrl = assemble_controller(model, gains, None).unwrap();
    let sys = assemble(model, &ctrl, None).unwrap();
    let x0 = default_initial_state(&sys.labels);
    let traj = propagate(&sys, &x0, 5.0, 0.05, Some(&w), false).unwrap();
    let p1_min = if pair.p1.nrows() > 0 {
        linalg::hermitian_min(&pair.p1)
    } else {
        f64::INFINITY
    };
    let p1_max = if pair.p1.nrows() > 0 {
        linalg::hermitian_max(&pair.p1)
    } else {
        0.0
    };
    let lo = (cert.alpha * linalg::hermitian_min(&pair.p0))
        .min(cert.beta * p1_min)
        .min(cert.gamma * p1_min)
        .min(1.0);
    let hi = cert.alpha * linalg::hermitian_max(&pair.p0)
        + cert.beta * p1_max
        + cert.gamma * p1_max
        + 1.0;
    for n in &traj.norms {
        let sumsq = n.xhat0.powi(2) + n.e0.powi(2) + n.xhat1.powi(2) + n.e1.powi(2) + n.z.powi(2);
        assert!(
            n.v >= lo * sumsq * (1.0 - 1e-9) - 1e-12,
            "lower sandwich violated: V={} lo*s={}",
            n.v,
            lo * sumsq
        );
        assert!(
            n.v <= hi * sumsq * (1.0 + 1e-9) + 1e-12,
            "upper sandwich violated: V={} hi*s={}",
            n.v,
            hi * sumsq
        );
    }
    traj.norms.len()
}

/// Criterion 8: zero uncertainty degenerates the mismatch certificate to the
/// exact one, field by field.
#[test]
fn criterion_8_eta_zero_degenerates() {
    let model = build_toy_with_delta(3, 200, 0.4).unwrap();
    let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
    let gains = gains_for(&model, &poles, &poles);
    let pair = lyapunov_pair(&model, &gains).unwrap();
    let exact = certify_exact(&model, &gains, &pair.p0, &pair.p1).unwrap();
    let unc = UncertaintySpec::zero(model.n0(), model.n1_dim(), model.n_u(), model.n_y());
    let u = certify_uncertain(&model, &unc, &gains, &pair.p0, &pair.p1).unwrap();
    let ok = u.eta == 0.0
        && u.eta0 == 0.0
        && u.eta1 == 0.0
        && u.eta2 == 0.0
        && (u.rho - exact.rho).abs() <= 1e-14 * exact.rho.abs()
        && u.certified_rate == exact.certified_rate
        && u.satisfied == exact.satisfied;
    check(
        "8 eta=0 degenerates to exact",
        ok,
        &format!("eta={} drho={:.1e}", u.eta, (u.rho - exact.rho).abs()),
    );
}

/// Criterion 8: realification preserves controller transfer values to 1e-10
/// at 10 random frequencies.
#[test]
fn criterion_8_realify_transfer_equivalence() {
    use rand::{Rng, SeedableRng};
    // complex-modal controller from the transport design
    let model = transport_model(0, 9);
    let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
    let gains = gains_for(&model, &poles, &poles);
    let ctrl = assemble_controller(&model, &gains, None).unwrap();
    let real = realify(&ctrl).unwrap();
    let max_im = real
        .l
        .iter()
        .chain(real.m.iter())
        .chain(real.n.iter())
        .chain(real.k.iter())
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let s = c(rng.gen_range(-1.0..2.0), rng.gen_range(-5.0..5.0));
        let t0 = ctrl.transfer(s).unwrap();
        let t1 = real.transfer(s).unwrap();
        worst = worst.max((t0 - t1).norm());
    }
    // eigenvalues of L preserved
    let ev_c = linalg::eigenvalues(&ctrl.l).unwrap();
    let ev_r = linalg::eigenvalues(&real.l).unwrap();
    let mut spec_err: f64 = 0.0;
    for e in &ev_c {
        let best = ev_r.iter().map(|f| (*f - *e).norm()).fold(f64::INFINITY, f64::min);
        spec_err = spec_err.max(best);
    }
    check(
        "8 realify transfer equivalence",
        worst < 1e-10 && max_im == 0.0 && spec_err < 1e-10,
        &format!("worst transfer diff {worst:.2e}, spectrum diff {spec_err:.2e}"),
    );
}

/// Supplementary: the exact-case closed loop contains sigma(A1) twice and
/// keeps tail eigenvalues when the tail output coefficients vanish
/// (separation structure at the closed-loop level).
#[test]
fn separation_structure_checks() {
    let model = build_toy_with_delta(3, 12, 0.4).unwrap();
    let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
    let gains = gains_for(&model, &poles, &poles);
    let ctrl = assemble_controller(&model, &gains, None).unwrap();
    let sys = assemble(&model, &ctrl, None).unwrap();
    let ev = linalg::eigenvalues(&sys.acl).unwrap();
    for i in 0..model.n1_dim() {
        let lam = model.a1[(i, i)];
        let hits = ev.iter().filter(|z| (**z - lam).norm() < 5e-7).count();
        assert!(hits >= 2, "sigma(A1) entry {lam} multiplicity {hits}");
    }
    // controller spectrum is the exact union by block triangularity
    let ev_l = linalg::eigenvalues(&ctrl.l).unwrap();
    for i in 0..model.n1_dim() {
        let lam = model.a1[(i, i)];
        assert!(ev_l.iter().any(|z| (*z - lam).norm() < 1e-8));
    }
    for p in &poles {
        assert!(ev_l.iter().any(|z| (*z - *p).norm() < 1e-8));
    }
    check("separation structure", true, "A1 contained twice; sigma(L) exact union");
}

/// Supplementary: route agreement between the rational models and the
/// independent oracles for both PDE plants (rightmost four modes, 1e-3).
#[test]
fn route_agreement_rightmost_modes() {
    let model = transport_model(0, 9);
    let oracle = oracle_eigs(&transport_plant(), 50, 4).unwrap();
    let mut modes: Vec<C64> = (0..model.n0()).map(|i| model.a0[(i, i)]).collect();
    modes.extend(model.tail.iter().map(|t| t.a));
    let mut worst: f64 = 0.0;
    for (m, o) in modes.iter().take(4).zip(oracle.iter()) {
        worst = worst.max((*m - *o).norm());
    }
    let model = diffusion_model(1.0, 2, 9);
    let oracle = oracle_eigs(&diffusion_plant(), 400, 4).unwrap();
    let mut modes: Vec<C64> = (0..model.n0()).map(|i| model.a0[(i, i)]).collect();
    for i in 0..model.n1_dim() {
        modes.push(model.a1[(i, i)]);
    }
    modes.extend(model.tail.iter().map(|t| t.a));
    for (m, o) in modes.iter().take(4).zip(oracle.iter()) {
        worst = worst.max((*m - *o).norm());
    }
    check(
        "route agreement",
        worst < 1e-3,
        &format!("worst rightmost-mode disagreement {worst:.2e}"),
    );
}

/// Supplementary: eigenvector residuals of every retained mode stay below
/// 1e-8 for both interconnected models.
#[test]
fn eigenvector_residuals() {
    let plant = transport_plant();
    let r = pade_exp(10, 0.7).unwrap();
    let (a, _, _) = interconnect(&plant, &r).unwrap();
    let r1 = plants::modal_residual(&a).unwrap();
    let plant = diffusion_plant();
    let r2 = rational_diffusion(10, 1.0, 1.0).unwrap();
    let (a, _, _) = interconnect(&plant, &r2).unwrap();
    let r2 = plants::modal_residual(&a).unwrap();
    check(
        "eigenvector residuals",
        r1 < 1e-8 && r2 < 1e-8,
        &format!("transport {r1:.2e}, diffusion {r2:.2e}"),
    );
}

/// Supplementary: sigma bounds are invariant under well-conditioned
/// similarity transforms (relative 1e-8).
#[test]
fn sigma_bounds_similarity_invariance() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut done = 0;
    while done < 25 {
        let n = rng.gen_range(2..=8);
        let m = CMatrix::from_fn(n, n, |_, _| {
            c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
        });
        let t = CMatrix::from_fn(n, n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        if linalg::cond2(&t) > 100.0 {
            continue;
        }
        let ti = match t.clone().try_inverse() {
            Some(ti) => ti,
            None => continue,
        };
        let sim = &t * &m * ti;
        let (lo1, hi1) = linalg::sigma_bounds(&m).unwrap();
        let (lo2, hi2) = linalg::sigma_bounds(&sim).unwrap();
        let scale = linalg::max_abs(&m).max(1.0);
        assert!((lo1 - lo2).abs() <= 1e-8 * scale, "lo {lo1} vs {lo2}");
        assert!((hi1 - hi2).abs() <= 1e-8 * scale, "hi {hi1} vs {hi2}");
        done += 1;
    }
    check("sigma bounds similarity invariance", true, "25 random similarities");
}

/// Supplementary: the certified-descent property in executable form — for a
/// design whose certificate is satisfied (decoupled tail output), V decays at
/// least at the certified rate along the simulated trajectory.
#[test]
fn certified_descent_when_satisfied() {
    let mut model = build_toy_with_delta(2, 50, 0.4).unwrap();
    // make the certificate pass: decouple the tail from the output, so
    // S_c = 0 and rho = 0 while the b-side coupling stays live
    for t in &mut model.tail {
        t.c = vec![c(0.0, 0.0)];
    }
    model.tail_b_sum_bound = Some(0.0);
    model.tail_c_sum_bound = Some(0.0);
    let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
    let gains = gains_for(&model, &poles, &poles);
    let pair = lyapunov_pair(&model, &gains).unwrap();
    let cert = certify_exact(&model, &gains, &pair.p0, &pair.p1).unwrap();
    assert!(cert.satisfied, "decoupled-tail toy certificate must pass");
    let f0 = f0_matrix(&model.a0, &model.b0, &model.c0, &gains);
    assert!(pair.check(&f0, &model.a1).is_empty());
    let w = VWeights::from_certificate(&cert, &pair);
    let ctrl = assemble_controller(&model, &gains, None).unwrap();
    let sys = assemble(&model, &ctrl, None).unwrap();
    let x0 = default_initial_state(&sys.labels);
    let dt = 0.02;
    let traj = propagate(&sys, &x0, 10.0, dt, Some(&w), false).unwrap();
    let decay = (-cert.certified_rate * dt).exp();
    let mut ok = true;
    for p in traj.norms.windows(2) {
        if p[1].v > p[0].v * decay * (1.0 + 1e-6) && p[0].v > 1e-300 {
            ok = false;
            break;
        }
    }
    check(
        "certified descent",
        ok,
        &format!("V(t+dt) <= e^(-{:.2} dt) V(t) along 10s", cert.certified_rate),
    );
}

/// Supplementary: transport eigenvector samples satisfy the characteristic
/// relations at oracle roots (residual < 1e-6), and the diffusion sample
/// respects the Dirichlet end and branch invariance.
#[test]
fn eigenvector_samples() {
    let plant = transport_plant();
    let roots = oracle_eigs(&plant, 50, 3).unwrap();
    let mut worst: f64 = 0.0;
    for r in &roots {
        let v = plants::eigvec_transport(*r, &plant, 33).unwrap();
        worst = worst.max(plants::characteristic_residual(&plant, &v).unwrap());
    }
    let dplant = diffusion_plant();
    let oracle = oracle_eigs(&dplant, 400, 1).unwrap();
    let v = plants::eigvec_diffusion(oracle[0], &dplant, 33).unwrap();
    let dres = plants::characteristic_residual(&dplant, &v).unwrap();
    check(
        "eigenvector characteristic residuals",
        worst < 1e-6 && dres < 1e-3,
        &format!("transport worst {worst:.2e}, diffusion (FD root) {dres:.2e}"),
    );
}

/// Supplementary: uniform modal rescaling (d = 0.5 and d = 2) leaves the
/// certificate decision unchanged on the decoupled-output toy variant after
/// re-synthesis.
#[test]
fn rescaling_leaves_decision_invariant() {
    let build = |d: f64| {
        let mut model = build_toy_with_delta(2, 50, 0.4).unwrap();
        for t in &mut model.tail {
            t.b = vec![t.b[0] / c(d, 0.0)];
            t.c = vec![t.c[0] * c(d, 0.0)];
        }
        model.b0 /= c(d, 0.0);
        model.b1 /= c(d, 0.0);
        model.c0 *= c(d, 0.0);
        model.c1 *= c(d, 0.0);
        model
    };
    let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
    let mut decisions = Vec::new();
    for d in [0.5, 1.0, 2.0] {
        let model = build(d);
        let gains = gains_for(&model, &poles, &poles);
        let pair = lyapunov_pair(&model, &gains).unwrap();
        let cert = certify_exact(&model, &gains, &pair.p0, &pair.p1).unwrap();
        decisions.push(cert.satisfied);
    }
    check(
        "rescaling decision invariance",
        decisions.windows(2).all(|w| w[0] == w[1]),
        &format!("decisions {decisions:?}"),
    );
}

/// Supplementary: sweeps of growing magnitude never increase the stable
/// fraction on a design with margin (stress monotonicity), evaluated on the
/// stabilizable decoupled-output toy variant.
#[test]
fn sweep_stress_monotonicity() {
    let mut model = build_toy_with_delta(2, 30, 0.4).unwrap();
    for t in &mut model.tail {
        t.c = vec![c(0.0, 0.0)];
    }
    model.tail_b_sum_bound = Some(0.0);
    model.tail_c_sum_bound = Some(0.0);
    let poles = vec![c(-0.5, 1.0), c(-0.5, -1.0)];
    let gains = gains_for(&model, &poles, &poles);
    let mut fractions = Vec::new();
    for mag in [0.1, 0.5, 1.0, 2.0] {
        let cfg = SweepConfig {
            magnitude: mag,
            trials: 24,
            seed: 4,
            t_end: 6.0,
            dt: 0.02,
        };
        let trials = uncertainty_sweep(&model, &gains, &cfg).unwrap();
        fractions.push(fraction_stable(&trials));
    }
    let ok = fractions.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    check(
        "sweep stress monotonicity",
        ok,
        &format!("stable fractions {fractions:?}"),
    );
}

// keep the complexify import live for ensemble helpers above
#[allow(dead_code)]
fn _unused(a: &DMatrix<f64>) -> CMatrix {
    complexify(a)
}

#[allow(dead_code)]
fn _unused2(v: &CVector) -> f64 {
    v.norm()
}
