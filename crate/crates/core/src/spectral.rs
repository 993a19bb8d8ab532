//! Decomposed modal plant representation: an unstable block `(A0, B0, C0)`,
//! a retained stable block `(A1, B1, C1)` and a finite stable tail of scalar
//! modes, all sorted by decreasing real part relative to a decay target
//! `delta`.

use nalgebra::{Complex, DMatrix};

use crate::error::{CoreError, Result};
use crate::linalg::{self, C64, CMatrix};

/// One scalar mode of the tail: `z' = a z + b u`, contributing `c z` to `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalTriple {
    /// Eigenvalue (1/time).
    pub a: C64,
    /// Input coefficient row, length `n_u`.
    pub b: Vec<C64>,
    /// Output coefficient column, length `n_y`.
    pub c: Vec<C64>,
}

impl ModalTriple {
    pub fn is_finite(&self) -> bool {
        let ok = |c: &C64| c.re.is_finite() && c.im.is_finite();
        ok(&self.a) && self.b.iter().all(ok) && self.c.iter().all(ok)
    }
}

/// Split sizes produced by [`split_at`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSplit {
    pub delta_bits: u64,
    pub n0: usize,
    pub n1_dim: usize,
}

impl ModelSplit {
    pub fn new(delta: f64, n0: usize, n1_dim: usize) -> Self {
        Self {
            delta_bits: delta.to_bits(),
            n0,
            n1_dim,
        }
    }

    pub fn delta(&self) -> f64 {
        f64::from_bits(self.delta_bits)
    }
}

/// Truncated decomposed plant.
///
/// Invariants (checked by [`SpectralModel::validate`]):
/// * `A1` diagonal with entries sorted by the modal ordering,
/// * every `A1` entry left of `-delta`, every tail mode left of `min Re(A1)`,
/// * `A0`'s spectrum right of (or on) `-delta`, or `n0 = 0`.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    pub a0: CMatrix,
    pub a1: CMatrix,
    pub b0: CMatrix,
    pub b1: CMatrix,
    pub c0: CMatrix,
    pub c1: CMatrix,
    pub tail: Vec<ModalTriple>,
    pub delta: f64,
    /// Sum of squared tail input-coefficient norms beyond the stored tail,
    /// when known analytically.
    pub tail_b_sum_bound: Option<f64>,
    /// Sum of squared tail output-coefficient norms beyond the stored tail.
    pub tail_c_sum_bound: Option<f64>,
}

impl SpectralModel {
    pub fn n0(&self) -> usize {
        self.a0.nrows()
    }

    pub fn n1_dim(&self) -> usize {
        self.a1.nrows()
    }

    pub fn n_tail(&self) -> usize {
        self.tail.len()
    }

    pub fn n_u(&self) -> usize {
        if self.b0.nrows() > 0 {
            self.b0.ncols()
        } else if self.b1.nrows() > 0 {
            self.b1.ncols()
        } else {
            self.tail.first().map(|t| t.b.len()).unwrap_or(0)
        }
    }

    pub fn n_y(&self) -> usize {
        if self.c0.ncols() > 0 {
            self.c0.nrows()
        } else if self.c1.ncols() > 0 {
            self.c1.nrows()
        } else {
            self.tail.first().map(|t| t.c.len()).unwrap_or(0)
        }
    }

    /// Tail input rows stacked into an `n_tail x n_u` matrix.
    pub fn tail_b_matrix(&self) -> CMatrix {
        let nu = self.n_u();
        CMatrix::from_fn(self.tail.len(), nu, |i, j| self.tail[i].b[j])
    }

    /// Tail output columns stacked into an `n_y x n_tail` matrix.
    pub fn tail_c_matrix(&self) -> CMatrix {
        let ny = self.n_y();
        CMatrix::from_fn(ny, self.tail.len(), |i, j| self.tail[j].c[i])
    }

    /// `|min Re|` over the block separating the retained part from the tail:
    /// the `A1` spectrum when present, otherwise the first (rightmost) tail
    /// mode. This is the decay margin entering the certificate denominators.
    pub fn stable_margin(&self) -> Result<f64> {
        if self.n1_dim() > 0 {
            let m = (0..self.n1_dim())
                .map(|i| self.a1[(i, i)].re)
                .fold(f64::INFINITY, f64::min);
            Ok(m.abs())
        } else if let Some(t) = self.tail.first() {
            Ok(t.a.re.abs())
        } else {
            Err(CoreError::NoStableTail {
                minus_delta: -self.delta,
            })
        }
    }

    /// Structural invariant check. Returns one description per violation;
    /// an empty list means the model is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let finite = |m: &CMatrix| m.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        for (name, m) in [
            ("A0", &self.a0),
            ("A1", &self.a1),
            ("B0", &self.b0),
            ("B1", &self.b1),
            ("C0", &self.c0),
            ("C1", &self.c1),
        ] {
            if !finite(m) {
                v.push(format!("{name} contains non-finite entries"));
            }
        }
        for (i, t) in self.tail.iter().enumerate() {
            if !t.is_finite() {
                v.push(format!("tail[{i}] contains non-finite entries"));
            }
        }
        if !(self.delta > 0.0) {
            v.push(format!("delta = {} is not positive", self.delta));
        }
        if self.a0.nrows() != self.a0.ncols() {
            v.push("A0 not square".into());
        }
        if self.a1.nrows() != self.a1.ncols() {
            v.push("A1 not square".into());
        }
        let n0 = self.n0();
        let n1 = self.n1_dim();
        if self.b0.nrows() != n0 {
            v.push(format!("B0 has {} rows, expected n0 = {n0}", self.b0.nrows()));
        }
        if self.b1.nrows() != n1 {
            v.push(format!("B1 has {} rows, expected n1 = {n1}", self.b1.nrows()));
        }
        if self.c0.ncols() != n0 {
            v.push(format!("C0 has {} cols, expected n0 = {n0}", self.c0.ncols()));
        }
        if self.c1.ncols() != n1 {
            v.push(format!("C1 has {} cols, expected n1 = {n1}", self.c1.ncols()));
        }
        let nu = self.n_u();
        let ny = self.n_y();
        for (i, t) in self.tail.iter().enumerate() {
            if t.b.len() != nu {
                v.push(format!("tail[{i}].b has length {}, expected {nu}", t.b.len()));
            }
            if t.c.len() != ny {
                v.push(format!("tail[{i}].c has length {}, expected {ny}", t.c.len()));
            }
        }

        // A1 diagonal
        let scale = linalg::max_abs(&self.a1).max(1.0);
        for i in 0..n1 {
            for j in 0..n1 {
                if i != j && self.a1[(i, j)].norm() > 1e-12 * scale {
                    v.push(format!("A1 not diagonal at ({i},{j})"));
                }
            }
        }
        // sigma_bar(A1) < -delta
        for i in 0..n1 {
            if self.a1[(i, i)].re >= -self.delta {
                v.push(format!(
                    "sigma_bar(A1) >= -delta: A1[{i}] = {:.6} >= {:.6}",
                    self.a1[(i, i)].re,
                    -self.delta
                ));
            }
        }
        // A1 internally ordered
        for i in 1..n1 {
            if mode_order(&self.a1[(i - 1, i - 1)], &self.a1[(i, i)]) == std::cmp::Ordering::Greater
            {
                v.push(format!("A1 diagonal out of order at index {i}"));
            }
        }
        // sigma_lower(A0) >= -delta, or empty block
        if n0 > 0 {
            match linalg::sigma_bounds(&self.a0) {
                Ok((lo, _)) => {
                    if lo < -self.delta - 1e-12 {
                        v.push(format!(
                            "A0 eigenvalue {lo:.6} lies left of -delta = {:.6}",
                            -self.delta
                        ));
                    }
                }
                Err(e) => v.push(format!("A0 eigensolve failed: {e}")),
            }
        }
        // tail entirely left of the A1 block (or of -delta when A1 empty)
        let boundary = if n1 > 0 {
            (0..n1).map(|i| self.a1[(i, i)].re).fold(f64::INFINITY, f64::min)
        } else {
            -self.delta
        };
        for (i, t) in self.tail.iter().enumerate() {
            if t.a.re >= boundary {
                if n1 > 0 {
                    v.push(format!(
                        "tail eigenvalue right of A1 block: tail[{i}].a = {:.6} >= {boundary:.6}",
                        t.a.re
                    ));
                } else {
                    v.push(format!(
                        "tail eigenvalue right of -delta: tail[{i}].a = {:.6} >= {boundary:.6}",
                        t.a.re
                    ));
                }
            }
        }
        // tail internally ordered
        for i in 1..self.tail.len() {
            if mode_order(&self.tail[i - 1].a, &self.tail[i].a) == std::cmp::Ordering::Greater {
                v.push(format!("tail out of order at index {i}"));
            }
        }
        if let Some(b) = self.tail_b_sum_bound {
            if !(b >= 0.0) {
                v.push(format!("tail_b_sum_bound = {b} negative or NaN"));
            }
        }
        if let Some(c) = self.tail_c_sum_bound {
            if !(c >= 0.0) {
                v.push(format!("tail_c_sum_bound = {c} negative or NaN"));
            }
        }
        v
    }
}

/// Total ordering of modes: decreasing real part, ties by increasing `|Im|`,
/// then positive imaginary part first.
pub fn mode_order(x: &C64, y: &C64) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match y.re.partial_cmp(&x.re) {
        Some(Ordering::Equal) | None => {}
        Some(o) => return o,
    }
    match x.im.abs().partial_cmp(&y.im.abs()) {
        Some(Ordering::Equal) | None => {}
        Some(o) => return o,
    }
    // positive imaginary first
    y.im.partial_cmp(&x.im).unwrap_or(Ordering::Equal)
}

/// Count the unstable block and size the retained stable block.
///
/// `n0` counts modes with `Re >= -delta`; `n1_dim = extra_stable` clipped to
/// the modes remaining after the unstable block.
pub fn split_at(triples: &[ModalTriple], delta: f64, extra_stable: usize) -> Result<ModelSplit> {
    if !(delta > 0.0) {
        return Err(CoreError::InvalidModel(format!("delta = {delta} must be positive")));
    }
    for i in 1..triples.len() {
        if mode_order(&triples[i - 1].a, &triples[i].a) == std::cmp::Ordering::Greater {
            return Err(CoreError::InvalidModel(format!(
                "modes not sorted by decreasing real part at index {i}"
            )));
        }
    }
    let n0 = triples.iter().take_while(|t| t.a.re >= -delta).count();
    if n0 == triples.len() && !triples.is_empty() {
        return Err(CoreError::NoStableTail { minus_delta: -delta });
    }
    let available = triples.len() - n0;
    Ok(ModelSplit::new(delta, n0, extra_stable.min(available)))
}

/// `(min, max)` real part of the spectrum of a complex square matrix.
pub fn sigma_bounds(m: &CMatrix) -> Result<(f64, f64)> {
    linalg::sigma_bounds(m)
}

/// Convenience constructor for scalar-mode test data.
pub fn triple(a: C64, b: C64, c: C64) -> ModalTriple {
    ModalTriple {
        a,
        b: vec![b],
        c: vec![c],
    }
}

/// Assemble a model from sorted mode triples plus a split.
pub fn model_from_triples(
    triples: &[ModalTriple],
    split: ModelSplit,
    n_tail: usize,
    tail_b_sum_bound: Option<f64>,
    tail_c_sum_bound: Option<f64>,
) -> Result<SpectralModel> {
    let n0 = split.n0;
    let n1 = split.n1_dim;
    if n0 + n1 + n_tail > triples.len() {
        return Err(CoreError::TruncationTooLarge {
            requested: n0 + n1 + n_tail,
            total: triples.len(),
        });
    }
    let nu = triples.first().map(|t| t.b.len()).unwrap_or(0);
    let ny = triples.first().map(|t| t.c.len()).unwrap_or(0);
    let diag = |ts: &[ModalTriple]| {
        DMatrix::from_fn(ts.len(), ts.len(), |i, j| {
            if i == j {
                ts[i].a
            } else {
                Complex::new(0.0, 0.0)
            }
        })
    };
    let bmat = |ts: &[ModalTriple]| CMatrix::from_fn(ts.len(), nu, |i, j| ts[i].b[j]);
    let cmat = |ts: &[ModalTriple]| CMatrix::from_fn(ny, ts.len(), |i, j| ts[j].c[i]);
    let (head0, rest) = triples.split_at(n0);
    let (head1, remainder) = rest.split_at(n1);
    let tail = remainder[..n_tail].to_vec();
    Ok(SpectralModel {
        a0: diag(head0),
        a1: diag(head1),
        b0: bmat(head0),
        b1: bmat(head1),
        c0: cmat(head0),
        c1: cmat(head1),
        tail,
        delta: split.delta(),
        tail_b_sum_bound,
        tail_c_sum_bound,
    })
}
