//! Dense linear-algebra kernels shared across the crate: general eigenvalue
//! extraction with diagonal balancing, inverse-iteration eigenvectors,
//! a Pade-13 scaling-and-squaring matrix exponential, and the shifted
//! Lyapunov solver.
//!
//! Everything works on `DMatrix<Complex<f64>>`; real inputs are promoted.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{CoreError, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Promote a real matrix to complex storage.
pub fn complexify(a: &DMatrix<f64>) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| C64::new(a[(i, j)], 0.0))
}

/// Largest absolute entry, used as a scale for tolerances.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Osborne balancing with power-of-two scale factors.
///
/// Returns `(d, a_balanced)` with `a_balanced = D^-1 A D`, `D = diag(d)`.
/// Balancing is exact in floating point (scale factors are powers of two) and
/// drastically improves eigenvector conditioning of companion-like matrices.
pub fn balance(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut d = DVector::from_element(n, 1.0f64);
    for _ in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut r: f64 = (0..n).map(|j| m[(i, j)] * m[(i, j)]).sum::<f64>().sqrt();
            let mut c: f64 = (0..n).map(|j| m[(j, i)] * m[(j, i)]).sum::<f64>().sqrt();
            if r == 0.0 || c == 0.0 {
                continue;
            }
            let mut f = 1.0f64;
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if f != 1.0 {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    (d, m)
}

/// Eigenvalues of a general complex matrix via the complex Schur form.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(CoreError::Numerical("non-finite entries in eigenvalue input".into()));
    }
    // All-real inputs go through the real Schur path, which is faster and
    // produces exactly conjugate-paired output.
    if a.iter().all(|c| c.im == 0.0) {
        let ar = DMatrix::<f64>::from_fn(n, n, |i, j| a[(i, j)].re);
        let (_, ab) = balance(&ar);
        let schur = ab
            .try_schur(f64::EPSILON, 100_000)
            .ok_or(CoreError::EigFailure { n })?;
        return Ok(schur.complex_eigenvalues().iter().cloned().collect());
    }
    let (d, ab) = balance_complex(a);
    let _ = d;
    let schur = ab
        .try_schur(f64::EPSILON, 100_000)
        .ok_or(CoreError::EigFailure { n })?;
    let vals = schur.eigenvalues().ok_or(CoreError::EigFailure { n })?;
    Ok(vals.iter().cloned().collect())
}

fn balance_complex(a: &CMatrix) -> (DVector<f64>, CMatrix) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut d = DVector::from_element(n, 1.0f64);
    for _ in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut r: f64 = (0..n).map(|j| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            let mut c: f64 = (0..n).map(|j| m[(j, i)].norm_sqr()).sum::<f64>().sqrt();
            if r == 0.0 || c == 0.0 {
                continue;
            }
            let mut f = 1.0f64;
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if f != 1.0 {
                converged = false;
                d[i] *= f;
                let fc = C64::new(f, 0.0);
                for j in 0..n {
                    m[(i, j)] /= fc;
                }
                for j in 0..n {
                    m[(j, i)] *= fc;
                }
            }
        }
        if converged {
            break;
        }
    }
    (d, m)
}

/// (min, max) real part over the spectrum of a square complex matrix.
pub fn sigma_bounds(a: &CMatrix) -> Result<(f64, f64)> {
    if a.nrows() != a.ncols() {
        return Err(CoreError::DimensionMismatch(format!(
            "sigma_bounds needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Err(CoreError::DimensionMismatch("sigma_bounds on empty matrix".into()));
    }
    let ev = eigenvalues(a)?;
    let lo = ev.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
    let hi = ev.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Eigenvalues of a Hermitian matrix, ascending. Input is symmetrized first.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Largest eigenvalue of a Hermitian matrix; 0 for an empty block.
pub fn hermitian_max(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).last().copied().unwrap_or(0.0)
}

/// Smallest eigenvalue of a Hermitian matrix; 0 for an empty block.
pub fn hermitian_min(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

/// 2-norm condition number via SVD.
pub fn cond2(a: &CMatrix) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Spectral norm (largest singular value).
pub fn norm2(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
}

/// Numerical rank with tolerance `max(m,n) * eps * smax`, SVD based.
pub fn rank(a: &CMatrix) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let tol = smax * f64::EPSILON * a.nrows().max(a.ncols()) as f64;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Smallest singular value.
pub fn smallest_singular_value(a: &CMatrix) -> f64 {
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// One eigenpair of `a` near the shift `s0` by inverse iteration.
///
/// Returns the Rayleigh-refined eigenvalue and a unit eigenvector whose
/// largest-magnitude component is rotated to the positive real axis.
pub fn inverse_iteration(a: &CMatrix, s0: C64) -> Result<(C64, CVector)> {
    inverse_iteration_seeded(a, s0, None)
}

/// [`inverse_iteration`] with an explicit starting vector.
pub fn inverse_iteration_seeded(
    a: &CMatrix,
    s0: C64,
    seed: Option<&CVector>,
) -> Result<(C64, CVector)> {
    let n = a.nrows();
    let scale = max_abs(a).max(1.0);
    // Small off-axis shift keeps the factorization nonsingular when s0 is
    // (numerically) an exact eigenvalue.
    let mut shift = s0 + C64::new(1e-11 * scale, 1e-13 * scale);
    let mut v = match seed {
        Some(s) => s.clone(),
        None => CVector::from_fn(n, |i, _| {
            C64::new(1.0 + (i as f64 * 0.618).sin(), (i as f64 * 0.381).cos())
        }),
    };
    v /= C64::new(v.norm(), 0.0);
    let mut lambda = s0;
    for iter in 0..16 {
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        let lu = m.lu();
        let w = match lu.solve(&v) {
            Some(w) => w,
            None => {
                shift += C64::new(1e-9 * scale, 1e-9 * scale);
                continue;
            }
        };
        let wn = w.norm();
        if !wn.is_finite() || wn == 0.0 {
            shift += C64::new(1e-9 * scale, -1e-9 * scale);
            continue;
        }
        v = w / C64::new(wn, 0.0);
        // Rayleigh quotient refinement.
        lambda = (v.adjoint() * a * &v)[(0, 0)];
        let resid = (a * &v - &v * lambda).norm();
        if resid <= 1e-13 * scale && iter >= 1 {
            break;
        }
        if iter >= 2 {
            shift = lambda + C64::new(1e-12 * scale, 0.0);
        }
    }
    normalize_phase(&mut v);
    Ok((lambda, v))
}

/// Rotate so the largest-magnitude entry is real and positive; unit norm.
pub fn normalize_phase(v: &mut CVector) {
    let nrm = v.norm();
    if nrm > 0.0 {
        *v /= C64::new(nrm, 0.0);
    }
    let mut jmax = 0;
    let mut best = 0.0;
    for (j, c) in v.iter().enumerate() {
        if c.norm() > best {
            best = c.norm();
            jmax = j;
        }
    }
    if best > 0.0 {
        let phase = v[jmax] / C64::new(best, 0.0);
        for c in v.iter_mut() {
            *c /= phase;
        }
    }
}

const PADE13_B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn onenorm(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling-and-squaring with the [13/13] Pade kernel.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let nrm = onenorm(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a_sc = a * C64::new(0.5f64.powi(s), 0.0);

    let ident = CMatrix::identity(n, n);
    let a2 = &a_sc * &a_sc;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b: Vec<C64> = PADE13_B.iter().map(|&x| C64::new(x, 0.0)).collect();
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &ident * b[1];
    let u = &a_sc * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &ident * b[0];
    let num = &v + &u;
    let den = &v - &u;
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Pade denominator singular; input badly scaled");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Solve `P (F + delta I) + (F + delta I)* P = -I` for Hermitian positive
/// definite `P` via the vectorized (Kronecker) linear system.
///
/// Requires the shifted matrix to be Hurwitz; then
/// `P F + F* P + 2 delta P = -I` makes the Lyapunov inequality strict.
pub fn solve_shifted_lyapunov(f: &CMatrix, delta: f64) -> Result<CMatrix> {
    let n = f.nrows();
    if n != f.ncols() {
        return Err(CoreError::DimensionMismatch(format!(
            "lyapunov: {}x{}",
            n,
            f.ncols()
        )));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let (_, hi) = sigma_bounds(f)?;
    if hi >= -delta {
        return Err(CoreError::NotHurwitz {
            sigma_bar: hi,
            minus_delta: -delta,
        });
    }
    let mut fs = f.clone();
    for i in 0..n {
        fs[(i, i)] += C64::new(delta, 0.0);
    }
    // vec(P Fs) = (Fs^T (x) I) vec(P); vec(Fs* P) = (I (x) Fs*) vec(P)
    let nn = n * n;
    let mut m = CMatrix::zeros(nn, nn);
    let fst = fs.transpose();
    let fsa = fs.adjoint();
    for bi in 0..n {
        for bj in 0..n {
            let coef = fst[(bi, bj)];
            for k in 0..n {
                m[(bi * n + k, bj * n + k)] += coef;
            }
        }
        for i in 0..n {
            for j in 0..n {
                m[(bi * n + i, bi * n + j)] += fsa[(i, j)];
            }
        }
    }
    let mut rhs = CVector::zeros(nn);
    for i in 0..n {
        rhs[i * n + i] = C64::new(-1.0, 0.0);
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| CoreError::Numerical("singular Lyapunov system".into()))?;
    let mut p = CMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            p[(i, j)] = sol[j * n + i];
        }
    }
    Ok((&p + p.adjoint()) * C64::new(0.5, 0.0))
}

/// Residual `|| P(F+dI) + (F+dI)*P + I ||_max` of a shifted Lyapunov solve.
pub fn lyapunov_residual(p: &CMatrix, f: &CMatrix, delta: f64) -> f64 {
    let n = f.nrows();
    let mut fs = f.clone();
    for i in 0..n {
        fs[(i, i)] += C64::new(delta, 0.0);
    }
    let mut r = p * &fs + fs.adjoint() * p;
    for i in 0..n {
        r[(i, i)] += C64::new(1.0, 0.0);
    }
    max_abs(&r)
}
