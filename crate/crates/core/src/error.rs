use thiserror::Error;

/// Errors surfaced by model construction, synthesis and simulation.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver failed to converge on a {n}x{n} matrix")]
    EigFailure { n: usize },

    #[error("near-defective spectrum: eigenvector condition {cond:.3e} exceeds {limit:.1e}")]
    NearDefectiveSpectrum { cond: f64, limit: f64 },

    #[error("uncontrollable pair: controllability matrix rank {rank} < {order}")]
    UncontrollablePair { rank: usize, order: usize },

    #[error("unobservable pair: observability matrix rank {rank} < {order}")]
    UnobservablePair { rank: usize, order: usize },

    #[error("shifted matrix not Hurwitz: max real part {sigma_bar:.6} >= -delta = {minus_delta:.6}")]
    NotHurwitz { sigma_bar: f64, minus_delta: f64 },

    #[error("tail too slow: stable margin {margin:.6} <= delta = {delta:.6}")]
    TailTooSlow { margin: f64, delta: f64 },

    #[error("zero denominator: K0* B1* P1 B1 K0 vanishes while the tail input sum is nonzero")]
    ZeroDenominator,

    #[error("alpha zero in eta0 denominator for a degenerate tail")]
    DegenerateAlpha,

    #[error("unpaired complex mode at index {index}: eigenvalue {value} has no adjacent conjugate")]
    UnpairedComplexMode { index: usize, value: String },

    #[error("no stable part: every mode lies right of -delta = {minus_delta:.6}")]
    NoStableTail { minus_delta: f64 },

    #[error("approximation order {n} outside supported range {lo}..={hi}")]
    OrderOutOfRange { n: usize, lo: usize, hi: usize },

    #[error("requested n0 + extra_stable + N_tail = {requested} exceeds total order {total}")]
    TruncationTooLarge { requested: usize, total: usize },

    #[error("matrix exponential would overflow: spectral bound {bound:.3} * dt exceeds 50; shrink dt")]
    ExpmOverflow { bound: f64 },

    #[error("trajectory at numerical floor: every sample below 1e-13")]
    TrajectoryAtFloor,

    #[error("too few samples in fit window: {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
