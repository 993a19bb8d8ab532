//! Closed-loop assembly in `(xhat0, e0, xhat1, e1, z)` coordinates, exact
//! matrix-exponential propagation, decay-rate fitting and randomized
//! uncertainty sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::linalg::{self, C64, CMatrix, CVector};
use crate::spectral::SpectralModel;
use crate::synthesis::{
    self, Certificate, ControllerRealization, Gains, LyapunovPair, Representation,
    UncertaintySpec,
};

/// State layout of the assembled closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLabels {
    pub n0: usize,
    pub n1: usize,
    pub n_tail: usize,
}

impl StateLabels {
    pub fn xhat0(&self) -> std::ops::Range<usize> {
        0..self.n0
    }
    pub fn e0(&self) -> std::ops::Range<usize> {
        self.n0..2 * self.n0
    }
    pub fn xhat1(&self) -> std::ops::Range<usize> {
        2 * self.n0..2 * self.n0 + self.n1
    }
    pub fn e1(&self) -> std::ops::Range<usize> {
        2 * self.n0 + self.n1..2 * self.n0 + 2 * self.n1
    }
    pub fn z(&self) -> std::ops::Range<usize> {
        2 * self.n0 + 2 * self.n1..2 * self.n0 + 2 * self.n1 + self.n_tail
    }
    pub fn total(&self) -> usize {
        2 * self.n0 + 2 * self.n1 + self.n_tail
    }
}

/// Assembled closed-loop generator.
#[derive(Debug, Clone)]
pub struct ClosedLoopSystem {
    pub acl: CMatrix,
    pub labels: StateLabels,
    pub model_ref: String,
    pub ctrl_ref: String,
}

/// Lyapunov weighting used to evaluate the functional along trajectories.
#[derive(Debug, Clone)]
pub struct VWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p0: CMatrix,
    pub p1: CMatrix,
}

impl VWeights {
    pub fn from_certificate(cert: &Certificate, pair: &LyapunovPair) -> Self {
        Self {
            alpha: cert.alpha,
            beta: cert.beta,
            gamma: cert.gamma,
            p0: pair.p0.clone(),
            p1: pair.p1.clone(),
        }
    }

    pub fn unit(n0: usize, n1: usize) -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            p0: CMatrix::identity(2 * n0, 2 * n0),
            p1: CMatrix::identity(n1, n1),
        }
    }
}

/// Per-sample component norms and Lyapunov value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleNorms {
    pub xhat0: f64,
    pub e0: f64,
    pub xhat1: f64,
    pub e1: f64,
    pub z: f64,
    pub v: f64,
}

impl SampleNorms {
    pub fn total(&self) -> f64 {
        (self.xhat0.powi(2) + self.e0.powi(2) + self.xhat1.powi(2) + self.e1.powi(2)
            + self.z.powi(2))
        .sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norms: Vec<SampleNorms>,
    pub states: Option<Vec<CVector>>,
}

/// Log-linear decay fit over the trailing window of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Fitted decay rate of the total norm (positive = decaying).
    pub rate: f64,
    /// Fitted overshoot, floored at 1.
    pub overshoot: f64,
    pub window: (f64, f64),
    pub residual: f64,
}

/// Assemble the closed loop from the true model, the synthesized controller
/// and (optionally) the knowledge-model mismatch.
///
/// The controller must be in the complex (modal) representation; `K0` and
/// `G0` are recovered from its `K = [K0, 0]` and `M = [-G0; 0]` blocks.
pub fn assemble(
    model: &SpectralModel,
    ctrl: &ControllerRealization,
    uncertainty: Option<&UncertaintySpec>,
) -> Result<ClosedLoopSystem> {
    if ctrl.representation != Representation::Complex {
        return Err(CoreError::InvalidModel(
            "closed-loop assembly needs the complex (modal) controller representation".into(),
        ));
    }
    let n0 = model.n0();
    let n1 = model.n1_dim();
    let nt = model.n_tail();
    let nu = model.n_u();
    let ny = model.n_y();
    if ctrl.order() != n0 + n1 {
        return Err(CoreError::DimensionMismatch(format!(
            "controller order {} vs model n0 + n1 = {}",
            ctrl.order(),
            n0 + n1
        )));
    }
    let k0 = ctrl.k.view((0, 0), (nu, n0)).into_owned();
    let g0 = ctrl.m.view((0, 0), (n0, ny)).into_owned() * C64::new(-1.0, 0.0);
    let gains = Gains {
        k0,
        g0,
        desired_controller_poles: Vec::new(),
        desired_observer_poles: Vec::new(),
    };
    let zero_unc;
    let unc = match uncertainty {
        Some(u) => {
            u.check_dims(model)?;
            u
        }
        None => {
            zero_unc = UncertaintySpec::zero(n0, n1, nu, ny);
            &zero_unc
        }
    };
    // knowledge model the controller was built on: X_hat = X - X_tilde
    let hat_a1 = &model.a1 - &unc.da1;
    let hat_b1 = &model.b1 - &unc.db1;
    let hat_f0 = {
        let hat = SpectralModel {
            a0: &model.a0 - &unc.da0,
            a1: hat_a1.clone(),
            b0: &model.b0 - &unc.db0,
            b1: hat_b1.clone(),
            c0: &model.c0 - &unc.dc0,
            c1: &model.c1 - &unc.dc1,
            tail: model.tail.clone(),
            delta: model.delta,
            tail_b_sum_bound: model.tail_b_sum_bound,
            tail_c_sum_bound: model.tail_c_sum_bound,
        };
        synthesis::f0_matrix(&hat.a0, &hat.b0, &hat.c0, &gains)
    };
    let f0_tilde = synthesis::f0_tilde(unc, &gains);
    let f0 = hat_f0 + f0_tilde;

    let labels = StateLabels { n0, n1, n_tail: nt };
    let mut acl = CMatrix::zeros(labels.total(), labels.total());
    let (rx0, re0, rx1, re1, rz) = (
        labels.xhat0(),
        labels.e0(),
        labels.xhat1(),
        labels.e1(),
        labels.z(),
    );
    acl.view_mut((0, 0), (2 * n0, 2 * n0)).copy_from(&f0);
    // observer corrections from e1 and the tail output, true data
    let gc1 = &gains.g0 * &model.c1;
    let cz = model.tail_c_matrix();
    let gcz = &gains.g0 * &cz;
    for (i, ii) in rx0.clone().enumerate() {
        for (j, jj) in re1.clone().enumerate() {
            acl[(ii, jj)] = -gc1[(i, j)];
        }
        for (j, jj) in rz.clone().enumerate() {
            acl[(ii, jj)] = -gcz[(i, j)];
        }
    }
    for (i, ii) in re0.clone().enumerate() {
        for (j, jj) in re1.clone().enumerate() {
            acl[(ii, jj)] = gc1[(i, j)];
        }
        for (j, jj) in rz.clone().enumerate() {
            acl[(ii, jj)] = gcz[(i, j)];
        }
    }
    // mismatch coupling from xhat1 into the observer block
    let gct1 = &gains.g0 * &unc.dc1;
    for (i, ii) in rx0.clone().enumerate() {
        for (j, jj) in rx1.clone().enumerate() {
            acl[(ii, jj)] = -gct1[(i, j)];
        }
    }
    for (i, ii) in re0.clone().enumerate() {
        for (j, jj) in rx1.clone().enumerate() {
            acl[(ii, jj)] += gct1[(i, j)];
        }
    }
    // xhat1' = A1_hat xhat1 + B1_hat K0 xhat0
    let b1k = &hat_b1 * &gains.k0;
    for (i, ii) in rx1.clone().enumerate() {
        for (j, jj) in rx1.clone().enumerate() {
            acl[(ii, jj)] = hat_a1[(i, j)];
        }
        for (j, jj) in rx0.clone().enumerate() {
            acl[(ii, jj)] = b1k[(i, j)];
        }
    }
    // e1' = A1 e1 + A1_tilde xhat1 + B1_tilde K0 xhat0
    let b1tk = &unc.db1 * &gains.k0;
    for (i, ii) in re1.clone().enumerate() {
        for (j, jj) in re1.clone().enumerate() {
            acl[(ii, jj)] = model.a1[(i, j)];
        }
        for (j, jj) in rx1.clone().enumerate() {
            acl[(ii, jj)] += unc.da1[(i, j)];
        }
        for (j, jj) in rx0.clone().enumerate() {
            acl[(ii, jj)] = b1tk[(i, j)];
        }
    }
    // tail rows: z_i' = a_i z_i + b_i K0 xhat0
    let bz = model.tail_b_matrix();
    let bzk = &bz * &gains.k0;
    for (i, ii) in rz.clone().enumerate() {
        acl[(ii, ii)] = model.tail[i].a;
        for (j, jj) in rx0.clone().enumerate() {
            acl[(ii, jj)] = bzk[(i, j)];
        }
    }
    Ok(ClosedLoopSystem {
        acl,
        labels,
        model_ref: String::new(),
        ctrl_ref: String::new(),
    })
}

/// Gershgorin upper bound on the spectral abscissa, used as an overflow guard.
fn gershgorin_bound(a: &CMatrix) -> f64 {
    let n = a.nrows();
    (0..n)
        .map(|i| {
            a[(i, i)].re
                + (0..n)
                    .filter(|&j| j != i)
                    .map(|j| a[(i, j)].norm())
                    .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Exact linear propagation `x(t + dt) = E x(t)`, `E = expm(Acl dt)`.
///
/// The Lyapunov value uses the supplied weighting; without one it degenerates
/// to the plain sum of squared component norms.
pub fn propagate(
    sys: &ClosedLoopSystem,
    x_init: &CVector,
    t_end: f64,
    dt: f64,
    weighting: Option<&VWeights>,
    keep_states: bool,
) -> Result<Trajectory> {
    if dt <= 0.0 || t_end < dt {
        return Err(CoreError::InvalidModel(format!(
            "need dt > 0 and t_end >= dt, got dt = {dt}, t_end = {t_end}"
        )));
    }
    if x_init.len() != sys.labels.total() {
        return Err(CoreError::DimensionMismatch(format!(
            "initial state length {} vs system order {}",
            x_init.len(),
            sys.labels.total()
        )));
    }
    let bound = gershgorin_bound(&sys.acl);
    if bound * dt > 50.0 {
        return Err(CoreError::ExpmOverflow { bound });
    }
    let e = linalg::expm(&(&sys.acl * C64::new(dt, 0.0)));
    let steps = (t_end / dt).round() as usize;
    let mut x = x_init.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    let mut states = if keep_states { Some(Vec::with_capacity(steps + 1)) } else { None };
    for k in 0..=steps {
        times.push(k as f64 * dt);
        norms.push(sample_norms(sys, &x, weighting));
        if let Some(st) = states.as_mut() {
            st.push(x.clone());
        }
        if k < steps {
            x = &e * x;
        }
    }
    Ok(Trajectory {
        times,
        norms,
        states,
    })
}

fn sub_norm(x: &CVector, r: std::ops::Range<usize>) -> f64 {
    x.as_slice()[r].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn quad_form(p: &CMatrix, x: &CVector, r: std::ops::Range<usize>) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    let seg = CVector::from_fn(r.len(), |i, _| x[r.start + i]);
    (seg.adjoint() * p * &seg)[(0, 0)].re
}

fn sample_norms(sys: &ClosedLoopSystem, x: &CVector, w: Option<&VWeights>) -> SampleNorms {
    let l = &sys.labels;
    let nx0 = sub_norm(x, l.xhat0());
    let ne0 = sub_norm(x, l.e0());
    let nx1 = sub_norm(x, l.xhat1());
    let ne1 = sub_norm(x, l.e1());
    let nz = sub_norm(x, l.z());
    let v = match w {
        Some(w) => {
            let v0 = w.alpha * quad_form(&w.p0, x, l.xhat0().start..l.e0().end);
            let v1 = w.beta * quad_form(&w.p1, x, l.xhat1())
                + w.gamma * quad_form(&w.p1, x, l.e1());
            v0 + v1 + nz * nz
        }
        None => nx0 * nx0 + ne0 * ne0 + nx1 * nx1 + ne1 * ne1 + nz * nz,
    };
    SampleNorms {
        xhat0: nx0,
        e0: ne0,
        xhat1: nx1,
        e1: ne1,
        z: nz,
        v,
    }
}

const NORM_FLOOR: f64 = 1e-13;

/// Least-squares log-linear fit of the total norm over the trailing
/// `window_fraction` of usable samples; `rate = -slope`, overshoot
/// `max norm(t) e^{rate t} / norm(0)`, floored at 1.
pub fn fit_decay(traj: &Trajectory, window_fraction: f64) -> Result<DecayFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(CoreError::InvalidModel(format!(
            "window_fraction {window_fraction} outside (0, 1]"
        )));
    }
    let usable: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(traj.norms.iter())
        .map(|(&t, n)| (t, n.total()))
        .filter(|(_, n)| *n > NORM_FLOOR)
        .collect();
    if usable.is_empty() {
        return Err(CoreError::TrajectoryAtFloor);
    }
    let start = ((usable.len() as f64) * (1.0 - window_fraction)).floor() as usize;
    let window = &usable[start.min(usable.len() - 1)..];
    if window.len() < 10 {
        return Err(CoreError::TooFewSamples {
            got: window.len(),
            need: 10,
        });
    }
    let n = window.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for (t, nrm) in window {
        let y = nrm.ln();
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = n * stt - st * st;
    if denom.abs() < 1e-300 {
        return Err(CoreError::Numerical("degenerate fit window".into()));
    }
    let slope = (n * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / n;
    let rate = -slope;
    let mut ss = 0.0;
    for (t, nrm) in window {
        let r = nrm.ln() - (slope * t + intercept);
        ss += r * r;
    }
    let residual = (ss / n).sqrt();
    let n0 = traj.norms[0].total().max(NORM_FLOOR);
    let overshoot = usable
        .iter()
        .map(|(t, nrm)| nrm * (rate * t).exp() / n0)
        .fold(1.0f64, f64::max);
    Ok(DecayFit {
        rate,
        overshoot,
        window: (window[0].0, window[window.len() - 1].0),
        residual,
    })
}

/// One trial of the uncertainty sweep.
#[derive(Debug, Clone)]
pub struct SweepTrial {
    pub index: usize,
    pub uncertainty: UncertaintySpec,
    pub certificate: Option<Certificate>,
    pub fit: Option<DecayFit>,
    pub sigma_bar: f64,
    pub stable: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub magnitude: f64,
    pub trials: usize,
    pub seed: u64,
    pub t_end: f64,
    pub dt: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            magnitude: 0.1,
            trials: 50,
            seed: 0,
            t_end: 20.0,
            dt: 1e-2,
        }
    }
}

/// Seeded entrywise-uniform perturbations of the six finite blocks form the
/// knowledge model; the controller is re-synthesized on it (same pole
/// targets), certified against the truth, and the true closed loop is
/// simulated. Per-trial failures are recorded, not fatal.
pub fn uncertainty_sweep(
    model: &SpectralModel,
    gains: &Gains,
    cfg: &SweepConfig,
) -> Result<Vec<SweepTrial>> {
    if cfg.magnitude < 0.0 {
        return Err(CoreError::InvalidModel("negative sweep magnitude".into()));
    }
    if cfg.trials == 0 {
        return Err(CoreError::InvalidModel("sweep needs at least one trial".into()));
    }
    let indices: Vec<usize> = (0..cfg.trials).collect();
    let trials: Vec<SweepTrial> = indices
        .par_iter()
        .map(|&idx| run_trial(model, gains, cfg, idx))
        .collect();
    Ok(trials)
}

pub fn fraction_stable(trials: &[SweepTrial]) -> f64 {
    if trials.is_empty() {
        return 0.0;
    }
    trials.iter().filter(|t| t.stable).count() as f64 / trials.len() as f64
}

fn run_trial(model: &SpectralModel, gains: &Gains, cfg: &SweepConfig, idx: usize) -> SweepTrial {
    let mut rng = ChaCha8Rng::seed_from_u64(
        cfg.seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    let m = cfg.magnitude;
    let mut draw = |rows: usize, cols: usize| {
        CMatrix::from_fn(rows, cols, |_, _| {
            // row-major draw order fixed by from_fn's fill order plus the
            // rng stream; real then imaginary part per entry
            let re = if m > 0.0 { rng.gen_range(-m..=m) } else { 0.0 };
            let im = if m > 0.0 { rng.gen_range(-m..=m) } else { 0.0 };
            C64::new(re, im)
        })
    };
    let n0 = model.n0();
    let n1 = model.n1_dim();
    let (nu, ny) = (model.n_u(), model.n_y());
    // knowledge model = truth + draw, so the tilde blocks are -draw
    let d_a0 = draw(n0, n0);
    let d_a1 = draw(n1, n1);
    let d_b0 = draw(n0, nu);
    let d_b1 = draw(n1, nu);
    let d_c0 = draw(ny, n0);
    let d_c1 = draw(ny, n1);
    let hat = {
        let mut h = model.clone();
        h.a0 = &model.a0 + &d_a0;
        h.a1 = &model.a1 + &d_a1;
        h.b0 = &model.b0 + &d_b0;
        h.b1 = &model.b1 + &d_b1;
        h.c0 = &model.c0 + &d_c0;
        h.c1 = &model.c1 + &d_c1;
        h
    };
    let unc = UncertaintySpec::new(
        &d_a0 * C64::new(-1.0, 0.0),
        &d_a1 * C64::new(-1.0, 0.0),
        &d_b0 * C64::new(-1.0, 0.0),
        &d_b1 * C64::new(-1.0, 0.0),
        &d_c0 * C64::new(-1.0, 0.0),
        &d_c1 * C64::new(-1.0, 0.0),
    );

    let fail = |msg: String, unc: UncertaintySpec| SweepTrial {
        index: idx,
        uncertainty: unc,
        certificate: None,
        fit: None,
        sigma_bar: f64::NAN,
        stable: false,
        error: Some(msg),
    };

    // synthesize on the knowledge model
    let k0 = match synthesis::place_poles(&hat.a0, &hat.b0, &gains.desired_controller_poles) {
        Ok(k) => k,
        Err(e) => return fail(format!("place_poles: {e}"), unc),
    };
    let g0 = match synthesis::place_observer(&hat.a0, &hat.c0, &gains.desired_observer_poles) {
        Ok(g) => g,
        Err(e) => return fail(format!("place_observer: {e}"), unc),
    };
    let trial_gains = Gains {
        k0,
        g0,
        desired_controller_poles: gains.desired_controller_poles.clone(),
        desired_observer_poles: gains.desired_observer_poles.clone(),
    };
    let f0_hat = synthesis::f0_matrix(&hat.a0, &hat.b0, &hat.c0, &trial_gains);
    let p0 = linalg::solve_shifted_lyapunov(&f0_hat, model.delta);
    let p1 = linalg::solve_shifted_lyapunov(&model.a1, model.delta);
    let certificate = match (&p0, &p1) {
        (Ok(p0), Ok(p1)) => {
            synthesis::certify_uncertain(&hat, &unc, &trial_gains, p0, p1).ok()
        }
        _ => None,
    };
    let ctrl = match synthesis::assemble_controller(model, &trial_gains, Some(&hat)) {
        Ok(c) => c,
        Err(e) => return fail(format!("assemble_controller: {e}"), unc),
    };
    let sys = match assemble(model, &ctrl, Some(&unc)) {
        Ok(s) => s,
        Err(e) => return fail(format!("assemble: {e}"), unc),
    };
    let sigma_bar = match linalg::sigma_bounds(&sys.acl) {
        Ok((_, hi)) => hi,
        Err(e) => return fail(format!("eigensolve: {e}"), unc),
    };
    let labels = sys.labels;
    let mut x0 = CVector::zeros(labels.total());
    for i in labels.e0().chain(labels.e1()).chain(labels.z()) {
        x0[i] = C64::new(1.0, 0.0);
    }
    let fit = propagate(&sys, &x0, cfg.t_end, cfg.dt, None, false)
        .and_then(|traj| fit_decay(&traj, 0.5))
        .ok();
    let stable = sigma_bar < 0.0 && fit.map(|f| f.rate > 0.0).unwrap_or(false);
    SweepTrial {
        index: idx,
        uncertainty: unc,
        certificate,
        fit,
        sigma_bar,
        stable,
        error: None,
    }
}

/// Default all-ones plant state with the observer at zero, in closed-loop
/// coordinates: `e0 = e1 = z = 1`, `xhat = 0`.
pub fn default_initial_state(labels: &StateLabels) -> CVector {
    let mut x0 = CVector::zeros(labels.total());
    for i in labels.e0().chain(labels.e1()).chain(labels.z()) {
        x0[i] = C64::new(1.0, 0.0);
    }
    x0
}
