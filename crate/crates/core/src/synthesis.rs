//! Observer-based controller synthesis and Lyapunov certification.
//!
//! Gains `K0`, `G0` are placed on the unstable block by Ackermann's formula
//! (single input / single output), `P0`, `P1` solve shifted Lyapunov
//! equations with `-I` right-hand side, and the certificates evaluate the
//! decay-rate conditions for the exact and the model-mismatch case.


use crate::error::{CoreError, Result};
use crate::linalg::{self, C64, CMatrix};
use crate::spectral::SpectralModel;

/// Feedback and observation gains together with the pole sets they realize.
#[derive(Debug, Clone)]
pub struct Gains {
    pub k0: CMatrix,
    pub g0: CMatrix,
    pub desired_controller_poles: Vec<C64>,
    pub desired_observer_poles: Vec<C64>,
}

/// Solutions of the two shifted Lyapunov inequalities.
#[derive(Debug, Clone)]
pub struct LyapunovPair {
    /// For the `2 n0` closed block `F0`.
    pub p0: CMatrix,
    /// For the retained stable block `A1`.
    pub p1: CMatrix,
    pub delta: f64,
}

impl LyapunovPair {
    /// Check both inequalities to eigenvalue tolerance -1e-10 and positive
    /// definiteness.
    pub fn check(&self, f0: &CMatrix, a1: &CMatrix) -> Vec<String> {
        let mut out = Vec::new();
        let two_delta = C64::new(2.0 * self.delta, 0.0);
        if self.p0.nrows() > 0 {
            if linalg::hermitian_min(&self.p0) <= 0.0 {
                out.push("P0 not positive definite".into());
            }
            let q = &self.p0 * f0 + f0.adjoint() * &self.p0 + &self.p0 * two_delta;
            if linalg::hermitian_max(&q) > -1e-10 {
                out.push(format!(
                    "P0 F0 + F0* P0 + 2 delta P0 not negative definite (max eig {:.3e})",
                    linalg::hermitian_max(&q)
                ));
            }
        }
        if self.p1.nrows() > 0 {
            if linalg::hermitian_min(&self.p1) <= 0.0 {
                out.push("P1 not positive definite".into());
            }
            let q = &self.p1 * a1 + a1.adjoint() * &self.p1 + &self.p1 * two_delta;
            if linalg::hermitian_max(&q) > -1e-10 {
                out.push(format!(
                    "P1 A1 + A1* P1 + 2 delta P1 not negative definite (max eig {:.3e})",
                    linalg::hermitian_max(&q)
                ));
            }
        }
        out
    }
}

/// Outcome of a certificate evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `rho_n` (exact) or `rho_hat_n` (uncertain).
    pub rho: f64,
    pub eta0: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta: f64,
    /// `delta` (exact) or `delta - eta` (uncertain).
    pub certified_rate: f64,
    pub delta: f64,
    /// Tail series `(S_b, S_c)` including analytic remainders when present.
    pub tail_sums: (f64, f64),
    /// No analytic remainder bound and the stored tail has not numerically
    /// converged; the series values are then truncations, not bounds.
    pub tail_inconclusive: bool,
    pub satisfied: bool,
}

/// Dynamic output-feedback controller `x' = L x + M y + N u`, `u = K x`.
#[derive(Debug, Clone)]
pub struct ControllerRealization {
    pub l: CMatrix,
    pub m: CMatrix,
    pub n: CMatrix,
    pub k: CMatrix,
    pub representation: Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Complex,
    RealifiedBlockDiagonal,
}

impl ControllerRealization {
    pub fn order(&self) -> usize {
        self.l.nrows()
    }

    /// Controller transfer function `K (sI - L - N K)^{-1} M` from `y` to `u`
    /// with the loop `u = K x` closed internally.
    pub fn transfer(&self, s: C64) -> Result<CMatrix> {
        let n = self.order();
        let mut m = &self.l + &self.n * &self.k;
        for i in 0..n {
            m[(i, i)] -= s;
        }
        let m = m * C64::new(-1.0, 0.0);
        let sol = m
            .lu()
            .solve(&self.m)
            .ok_or_else(|| CoreError::Numerical("sI - L - NK singular".into()))?;
        Ok(&self.k * sol)
    }
}

/// Perturbation blocks `X_tilde = X_true - X_hat` with cached spectral norms.
#[derive(Debug, Clone)]
pub struct UncertaintySpec {
    pub da0: CMatrix,
    pub da1: CMatrix,
    pub db0: CMatrix,
    pub db1: CMatrix,
    pub dc0: CMatrix,
    pub dc1: CMatrix,
    pub norms: UncertaintyNorms,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyNorms {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
    pub c0: f64,
    pub c1: f64,
}

impl UncertaintySpec {
    pub fn new(
        da0: CMatrix,
        da1: CMatrix,
        db0: CMatrix,
        db1: CMatrix,
        dc0: CMatrix,
        dc1: CMatrix,
    ) -> Self {
        let norms = UncertaintyNorms {
            a0: linalg::norm2(&da0),
            a1: linalg::norm2(&da1),
            b0: linalg::norm2(&db0),
            b1: linalg::norm2(&db1),
            c0: linalg::norm2(&dc0),
            c1: linalg::norm2(&dc1),
        };
        Self {
            da0,
            da1,
            db0,
            db1,
            dc0,
            dc1,
            norms,
        }
    }

    pub fn zero(n0: usize, n1: usize, n_u: usize, n_y: usize) -> Self {
        Self::new(
            CMatrix::zeros(n0, n0),
            CMatrix::zeros(n1, n1),
            CMatrix::zeros(n0, n_u),
            CMatrix::zeros(n1, n_u),
            CMatrix::zeros(n_y, n0),
            CMatrix::zeros(n_y, n1),
        )
    }

    pub fn check_dims(&self, model: &SpectralModel) -> Result<()> {
        let (n0, n1) = (model.n0(), model.n1_dim());
        let (nu, ny) = (model.n_u(), model.n_y());
        let want = [
            ("dA0", self.da0.shape(), (n0, n0)),
            ("dA1", self.da1.shape(), (n1, n1)),
            ("dB0", self.db0.shape(), (n0, nu)),
            ("dB1", self.db1.shape(), (n1, nu)),
            ("dC0", self.dc0.shape(), (ny, n0)),
            ("dC1", self.dc1.shape(), (ny, n1)),
        ];
        for (name, got, exp) in want {
            if got != exp {
                return Err(CoreError::DimensionMismatch(format!(
                    "{name}: got {got:?}, expected {exp:?}"
                )));
            }
        }
        Ok(())
    }

    /// True-plant blocks recovered from a knowledge model: `X = X_hat + X_tilde`.
    pub fn apply_to(&self, hat: &SpectralModel) -> SpectralModel {
        let mut truth = hat.clone();
        truth.a0 = &hat.a0 + &self.da0;
        truth.a1 = &hat.a1 + &self.da1;
        truth.b0 = &hat.b0 + &self.db0;
        truth.b1 = &hat.b1 + &self.db1;
        truth.c0 = &hat.c0 + &self.dc0;
        truth.c1 = &hat.c1 + &self.dc1;
        truth
    }
}

const CTRB_COND_WARN: f64 = 1e10;

/// Single-input pole placement by Ackermann's formula.
///
/// `sigma(A + B K)` matches the requested set; errors when `(A, B)` fails the
/// Kalman rank test, warns when the controllability matrix condition exceeds
/// 1e10.
pub fn place_poles(a: &CMatrix, b: &CMatrix, poles: &[C64]) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != 1 {
        return Err(CoreError::DimensionMismatch(format!(
            "place_poles: A {}x{}, B {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if poles.len() != n {
        return Err(CoreError::DimensionMismatch(format!(
            "place_poles: {} poles for order {n}",
            poles.len()
        )));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(1, 0));
    }
    let mut ctrb = CMatrix::zeros(n, n);
    let mut col = b.column(0).into_owned();
    for j in 0..n {
        ctrb.column_mut(j).copy_from(&col);
        col = a * &col;
    }
    let r = linalg::rank(&ctrb);
    if r < n {
        return Err(CoreError::UncontrollablePair { rank: r, order: n });
    }
    let cond = linalg::cond2(&ctrb);
    if cond > CTRB_COND_WARN {
        log::warn!("controllability matrix ill-conditioned: cond = {cond:.3e}");
    }
    // phi(A) = prod (A - p I)
    let mut phi = CMatrix::identity(n, n);
    for &p in poles {
        let mut shift = a.clone();
        for i in 0..n {
            shift[(i, i)] -= p;
        }
        phi = phi * shift;
    }
    let mut en = CMatrix::zeros(1, n);
    en[(0, n - 1)] = C64::new(1.0, 0.0);
    // K = -e_n^T Ctrb^{-1} phi(A)
    let lhs = ctrb
        .transpose()
        .lu()
        .solve(&en.transpose())
        .ok_or_else(|| CoreError::Numerical("controllability matrix singular".into()))?;
    Ok(lhs.transpose() * phi * C64::new(-1.0, 0.0))
}

/// Single-output observer gain by duality: `sigma(A + G C)` matches `poles`.
pub fn place_observer(a: &CMatrix, c: &CMatrix, poles: &[C64]) -> Result<CMatrix> {
    let n = a.nrows();
    if c.nrows() != 1 || c.ncols() != n {
        return Err(CoreError::DimensionMismatch(format!(
            "place_observer: C {}x{} for order {n}",
            c.nrows(),
            c.ncols()
        )));
    }
    let kt = place_poles(&a.transpose(), &c.transpose(), poles).map_err(|e| match e {
        CoreError::UncontrollablePair { rank, order } => {
            CoreError::UnobservablePair { rank, order }
        }
        other => other,
    })?;
    Ok(kt.transpose())
}

/// See [`crate::linalg::solve_shifted_lyapunov`].
pub fn solve_shifted_lyapunov(f: &CMatrix, delta: f64) -> Result<CMatrix> {
    linalg::solve_shifted_lyapunov(f, delta)
}

/// The closed block `F0 = [A0 + B0 K0, -G0 C0; 0, A0 + G0 C0]`.
pub fn f0_matrix(a0: &CMatrix, b0: &CMatrix, c0: &CMatrix, gains: &Gains) -> CMatrix {
    let n0 = a0.nrows();
    let mut f = CMatrix::zeros(2 * n0, 2 * n0);
    let tl = a0 + b0 * &gains.k0;
    let tr = (&gains.g0 * c0) * C64::new(-1.0, 0.0);
    let br = a0 + &gains.g0 * c0;
    f.view_mut((0, 0), (n0, n0)).copy_from(&tl);
    f.view_mut((0, n0), (n0, n0)).copy_from(&tr);
    f.view_mut((n0, n0), (n0, n0)).copy_from(&br);
    f
}

/// Solve both shifted Lyapunov equations for a synthesized design.
pub fn lyapunov_pair(model: &SpectralModel, gains: &Gains) -> Result<LyapunovPair> {
    let f0 = f0_matrix(&model.a0, &model.b0, &model.c0, gains);
    let p0 = linalg::solve_shifted_lyapunov(&f0, model.delta)?;
    let p1 = linalg::solve_shifted_lyapunov(&model.a1, model.delta)?;
    Ok(LyapunovPair {
        p0,
        p1,
        delta: model.delta,
    })
}

/// Stacked observer injection `[-G0; G0]`.
fn g_stack(g0: &CMatrix) -> CMatrix {
    let (n0, ny) = g0.shape();
    let mut s = CMatrix::zeros(2 * n0, ny);
    s.view_mut((0, 0), (n0, ny)).copy_from(&(g0 * C64::new(-1.0, 0.0)));
    s.view_mut((n0, 0), (n0, ny)).copy_from(g0);
    s
}

struct TailSeries {
    s_b: f64,
    s_c: f64,
    inconclusive: bool,
    /// sigma-bar of the output kernel `[-G0;G0]* P0 [-G0;G0]`, reused by the
    /// remainder bound.
    w0: CMatrix,
}

fn tail_series(model: &SpectralModel, gains: &Gains, p0: &CMatrix) -> TailSeries {
    let gs = g_stack(&gains.g0);
    let w0 = gs.adjoint() * p0 * &gs;
    let k_norm2 = linalg::norm2(&gains.k0).powi(2);
    let w0_max = linalg::hermitian_max(&w0);

    let mut s_b = 0.0;
    let mut s_c = 0.0;
    let mut last_b = 0.0;
    let mut last_c = 0.0;
    for t in &model.tail {
        // sigma_bar(K0* b* b K0) = |b K0|^2 for the rank-one kernel
        let bk: Vec<C64> = (0..gains.k0.ncols())
            .map(|j| {
                (0..t.b.len())
                    .map(|u| t.b[u] * gains.k0[(u, j)])
                    .sum::<C64>()
            })
            .collect();
        last_b = bk.iter().map(|z| z.norm_sqr()).sum::<f64>();
        s_b += last_b;
        // c* W0 c
        let cvec = CMatrix::from_fn(t.c.len(), 1, |i, _| t.c[i]);
        last_c = (cvec.adjoint() * &w0 * &cvec)[(0, 0)].re;
        s_c += last_c;
    }
    let mut inconclusive = false;
    match model.tail_b_sum_bound {
        Some(rem) => s_b += k_norm2 * rem,
        None => {
            if !model.tail.is_empty() && last_b >= 1e-12 * s_b {
                inconclusive = true;
            }
        }
    }
    match model.tail_c_sum_bound {
        Some(rem) => s_c += w0_max * rem,
        None => {
            if !model.tail.is_empty() && last_c >= 1e-12 * s_c {
                inconclusive = true;
            }
        }
    }
    TailSeries {
        s_b,
        s_c,
        inconclusive,
        w0,
    }
}

const WEIGHT_FLOOR: f64 = 1e-12;

fn weight_values(
    s_b: f64,
    margin: f64,
    delta: f64,
    p0_min: f64,
    p1_min: f64,
    beta_denom: f64,
    gamma_num: f64,
    n1_dim: usize,
) -> Result<(f64, f64, f64)> {
    if margin <= delta {
        return Err(CoreError::TailTooSlow { margin, delta });
    }
    let alpha_raw = 4.0 / delta * s_b / (p0_min * (margin - delta));
    let alpha = alpha_raw.max(WEIGHT_FLOOR);
    if n1_dim == 0 {
        // no retained stable block: V1 is absent, beta and gamma are inert
        return Ok((alpha, 1.0, 1.0));
    }
    let beta = if beta_denom <= 0.0 {
        if s_b == 0.0 {
            WEIGHT_FLOOR
        } else {
            return Err(CoreError::ZeroDenominator);
        }
    } else {
        (delta * s_b / ((margin - delta) * beta_denom)).max(WEIGHT_FLOOR)
    };
    let gamma = (4.0 * alpha * gamma_num / (delta * delta * p1_min)).max(WEIGHT_FLOOR);
    Ok((alpha, beta, gamma))
}

/// The Lyapunov weights `(alpha, beta, gamma)` for a synthesized design.
pub fn weights(
    model: &SpectralModel,
    gains: &Gains,
    p0: &CMatrix,
    p1: &CMatrix,
) -> Result<(f64, f64, f64)> {
    let series = tail_series(model, gains, p0);
    let margin = model.stable_margin()?;
    let p0_min = linalg::hermitian_min(p0);
    let p1_min = linalg::hermitian_min(p1);
    let beta_denom = kernel_max(&gains.k0, &model.b1, p1);
    let gamma_num = linalg::hermitian_max(
        &(model.c1.adjoint() * &series.w0 * &model.c1),
    );
    weight_values(
        series.s_b,
        margin,
        model.delta,
        p0_min,
        p1_min,
        beta_denom,
        gamma_num,
        model.n1_dim(),
    )
}

/// `sigma_bar(K0* B* P1 B K0)` for an input-side block B.
fn kernel_max(k0: &CMatrix, b: &CMatrix, p1: &CMatrix) -> f64 {
    if b.nrows() == 0 || k0.ncols() == 0 {
        return 0.0;
    }
    let bk = b * k0;
    linalg::hermitian_max(&(bk.adjoint() * p1 * &bk))
}

fn hautus_checks(model: &SpectralModel) -> Result<()> {
    let n0 = model.n0();
    if n0 == 0 {
        return Ok(());
    }
    // Kalman rank on (A0, B0)
    let mut ctrb = CMatrix::zeros(n0, n0 * model.n_u().max(1));
    let mut blk = model.b0.clone();
    for j in 0..n0 {
        ctrb.view_mut((0, j * model.n_u()), (n0, model.n_u()))
            .copy_from(&blk);
        blk = &model.a0 * blk;
    }
    let r = linalg::rank(&ctrb);
    if r < n0 {
        return Err(CoreError::UncontrollablePair { rank: r, order: n0 });
    }
    let mut obsv = CMatrix::zeros(n0 * model.n_y().max(1), n0);
    let mut blk = model.c0.clone();
    for i in 0..n0 {
        obsv.view_mut((i * model.n_y(), 0), (model.n_y(), n0))
            .copy_from(&blk);
        blk = blk * &model.a0;
    }
    let r = linalg::rank(&obsv);
    if r < n0 {
        return Err(CoreError::UnobservablePair { rank: r, order: n0 });
    }
    Ok(())
}

/// Exact-model certificate: `rho_n <= 1` grants decay rate `delta`.
pub fn certify_exact(
    model: &SpectralModel,
    gains: &Gains,
    p0: &CMatrix,
    p1: &CMatrix,
) -> Result<Certificate> {
    hautus_checks(model)?;
    let series = tail_series(model, gains, p0);
    let margin = model.stable_margin()?;
    let delta = model.delta;
    if margin <= delta {
        return Err(CoreError::TailTooSlow { margin, delta });
    }
    let p0_min = linalg::hermitian_min(p0);
    let p1_min = linalg::hermitian_min(p1);
    let beta_denom = kernel_max(&gains.k0, &model.b1, p1);
    let gamma_num =
        linalg::hermitian_max(&(model.c1.adjoint() * &series.w0 * &model.c1));
    let (alpha, beta, gamma) = weight_values(
        series.s_b,
        margin,
        delta,
        p0_min,
        p1_min,
        beta_denom,
        gamma_num,
        model.n1_dim(),
    )?;
    let rho = 16.0 * series.s_b * series.s_c
        / (delta * delta * p0_min * (margin - delta) * margin);
    Ok(Certificate {
        alpha,
        beta,
        gamma,
        rho,
        eta0: 0.0,
        eta1: 0.0,
        eta2: 0.0,
        eta: 0.0,
        certified_rate: delta,
        delta,
        tail_sums: (series.s_b, series.s_c),
        tail_inconclusive: series.inconclusive,
        satisfied: rho <= 1.0,
    })
}

/// The mismatch block
/// `F0_tilde = [-G0 C0~, -G0 C0~; A0~ + B0~ K0 + G0 C0~, A0~ + G0 C0~]`.
pub fn f0_tilde(unc: &UncertaintySpec, gains: &Gains) -> CMatrix {
    let n0 = unc.da0.nrows();
    let g0c0 = &gains.g0 * &unc.dc0;
    let mut f = CMatrix::zeros(2 * n0, 2 * n0);
    let tl = &g0c0 * C64::new(-1.0, 0.0);
    f.view_mut((0, 0), (n0, n0)).copy_from(&tl);
    f.view_mut((0, n0), (n0, n0)).copy_from(&tl);
    let bl = &unc.da0 + &unc.db0 * &gains.k0 + &g0c0;
    f.view_mut((n0, 0), (n0, n0)).copy_from(&bl);
    let br = &unc.da0 + &g0c0;
    f.view_mut((n0, n0), (n0, n0)).copy_from(&br);
    f
}

/// Model-mismatch certificate: `rho_hat_n <= 1` and `eta < delta` grant decay
/// rate `delta - eta`.
///
/// `model_hat` is the knowledge model the gains were designed on, `unc` the
/// deviation of the true plant from it; `p0` solves the shifted inequality
/// for the hatted `F0`, `p1` for the true `A1`.
pub fn certify_uncertain(
    model_hat: &SpectralModel,
    unc: &UncertaintySpec,
    gains: &Gains,
    p0: &CMatrix,
    p1: &CMatrix,
) -> Result<Certificate> {
    unc.check_dims(model_hat)?;
    hautus_checks(model_hat)?;
    let truth = unc.apply_to(model_hat);
    let delta = model_hat.delta;
    let margin = truth.stable_margin()?;
    if margin <= delta {
        return Err(CoreError::TailTooSlow { margin, delta });
    }
    // the tail is shared between the knowledge model and the truth
    let series = tail_series(&truth, gains, p0);
    let p0_min = linalg::hermitian_min(p0);
    let p1_min = linalg::hermitian_min(p1);
    // beta uses the knowledge-model input block
    let beta_denom = kernel_max(&gains.k0, &model_hat.b1, p1);
    let gamma_num =
        linalg::hermitian_max(&(truth.c1.adjoint() * &series.w0 * &truth.c1));
    let (alpha, beta, gamma) = weight_values(
        series.s_b,
        margin,
        delta,
        p0_min,
        p1_min,
        beta_denom,
        gamma_num,
        truth.n1_dim(),
    )?;
    let rho = 16.0 * series.s_b * series.s_c
        / (delta * delta * p0_min * (margin - delta) * margin);

    let ft = f0_tilde(unc, gains);
    let ft_norm = linalg::hermitian_max(&(ft.adjoint() * &ft)).max(0.0).sqrt();
    let gs = g_stack(&gains.g0);
    let w0 = gs.adjoint() * p0 * &gs;
    let c1t_term = linalg::hermitian_max(&(unc.dc1.adjoint() * &w0 * &unc.dc1));
    let b1t_term = kernel_max(&gains.k0, &unc.db1, p1);
    let a1t_norm = linalg::hermitian_max(&(unc.da1.adjoint() * &unc.da1))
        .max(0.0)
        .sqrt();

    let eta0_third = if b1t_term == 0.0 {
        0.0
    } else if alpha <= WEIGHT_FLOOR {
        return Err(CoreError::DegenerateAlpha);
    } else {
        gamma * b1t_term / (alpha * p0_min)
    };
    let eta0 = 2.0 * ft_norm + c1t_term + eta0_third;
    let (eta1, eta2) = if truth.n1_dim() == 0 {
        (0.0, 0.0)
    } else {
        (
            (2.0 + gamma / beta) * a1t_norm + alpha * c1t_term / (beta * p1_min),
            b1t_term + a1t_norm,
        )
    };
    let eta = eta0.max(eta1).max(eta2);
    Ok(Certificate {
        alpha,
        beta,
        gamma,
        rho,
        eta0,
        eta1,
        eta2,
        eta,
        certified_rate: delta - eta,
        delta,
        tail_sums: (series.s_b, series.s_c),
        tail_inconclusive: series.inconclusive,
        satisfied: rho <= 1.0 && eta < delta,
    })
}

/// Assemble `(L, M, N, K)`; blocks come from `model_hat` when given
/// (mismatch design), from `model` otherwise.
pub fn assemble_controller(
    model: &SpectralModel,
    gains: &Gains,
    model_hat: Option<&SpectralModel>,
) -> Result<ControllerRealization> {
    let src = model_hat.unwrap_or(model);
    let n0 = src.n0();
    let n1 = src.n1_dim();
    let nu = src.n_u();
    let ny = src.n_y();
    if gains.k0.shape() != (nu, n0) || gains.g0.shape() != (n0, ny) {
        return Err(CoreError::DimensionMismatch(format!(
            "gains K0 {:?} / G0 {:?} for n0 = {n0}, nu = {nu}, ny = {ny}",
            gains.k0.shape(),
            gains.g0.shape()
        )));
    }
    let n = n0 + n1;
    let mut l = CMatrix::zeros(n, n);
    l.view_mut((0, 0), (n0, n0))
        .copy_from(&(&src.a0 + &gains.g0 * &src.c0));
    l.view_mut((0, n0), (n0, n1))
        .copy_from(&(&gains.g0 * &src.c1));
    l.view_mut((n0, n0), (n1, n1)).copy_from(&src.a1);
    let mut m = CMatrix::zeros(n, ny);
    m.view_mut((0, 0), (n0, ny))
        .copy_from(&(&gains.g0 * C64::new(-1.0, 0.0)));
    let mut nn = CMatrix::zeros(n, nu);
    nn.view_mut((0, 0), (n0, nu)).copy_from(&src.b0);
    nn.view_mut((n0, 0), (n1, nu)).copy_from(&src.b1);
    let mut k = CMatrix::zeros(nu, n);
    k.view_mut((0, 0), (nu, n0)).copy_from(&gains.k0);
    Ok(ControllerRealization {
        l,
        m,
        n: nn,
        k,
        representation: Representation::Complex,
    })
}

const REALIFY_IM_TOL: f64 = 1e-12;

/// Similarity taking adjacent conjugate mode pairs to real 2x2
/// rotation-scaling blocks; real modes pass through.
///
/// Requires the controller state coordinates to be conjugate-paired (the
/// builder ordering guarantees adjacency). Output entries are real to 1e-12.
pub fn realify(ctrl: &ControllerRealization) -> Result<ControllerRealization> {
    let n = ctrl.order();
    let scale = linalg::max_abs(&ctrl.l).max(1.0);
    let all_real = [&ctrl.l, &ctrl.m, &ctrl.n, &ctrl.k]
        .iter()
        .all(|m| m.iter().all(|c| c.im.abs() <= REALIFY_IM_TOL * scale));
    if all_real {
        let strip = |m: &CMatrix| m.map(|c| C64::new(c.re, 0.0));
        return Ok(ControllerRealization {
            l: strip(&ctrl.l),
            m: strip(&ctrl.m),
            n: strip(&ctrl.n),
            k: strip(&ctrl.k),
            representation: Representation::RealifiedBlockDiagonal,
        });
    }
    // build the block transform T: complex coordinates = T * real coordinates
    let inv_sqrt2 = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
    let mi = C64::new(0.0, -1.0);
    let pi = C64::new(0.0, 1.0);
    let mut t = CMatrix::zeros(n, n);
    let mut i = 0;
    while i < n {
        let lam = ctrl.l[(i, i)];
        if lam.im.abs() <= 1e-9 * scale {
            t[(i, i)] = C64::new(1.0, 0.0);
            i += 1;
            continue;
        }
        if i + 1 >= n || (ctrl.l[(i + 1, i + 1)] - lam.conj()).norm() > 1e-8 * scale {
            return Err(CoreError::UnpairedComplexMode {
                index: i,
                value: format!("{lam}"),
            });
        }
        t[(i, i)] = inv_sqrt2;
        t[(i, i + 1)] = inv_sqrt2 * mi;
        t[(i + 1, i)] = inv_sqrt2;
        t[(i + 1, i + 1)] = inv_sqrt2 * pi;
        i += 2;
    }
    let t_lu = t.clone().lu();
    let solve = |rhs: &CMatrix| -> Result<CMatrix> {
        t_lu.solve(rhs)
            .ok_or_else(|| CoreError::Numerical("realification transform singular".into()))
    };
    let l_r = solve(&(&ctrl.l * &t))?;
    let m_r = solve(&ctrl.m)?;
    let n_r = solve(&ctrl.n)?;
    let k_r = &ctrl.k * &t;
    let worst_im = [&l_r, &m_r, &n_r, &k_r]
        .iter()
        .flat_map(|m| m.iter())
        .map(|c| c.im.abs())
        .fold(0.0, f64::max);
    if worst_im > REALIFY_IM_TOL * scale {
        return Err(CoreError::Numerical(format!(
            "realified controller has residual imaginary parts {worst_im:.3e}; \
             modal data not conjugate-consistent"
        )));
    }
    let strip = |m: &CMatrix| m.map(|c| C64::new(c.re, 0.0));
    Ok(ControllerRealization {
        l: strip(&l_r),
        m: strip(&m_r),
        n: strip(&n_r),
        k: strip(&k_r),
        representation: Representation::RealifiedBlockDiagonal,
    })
}
