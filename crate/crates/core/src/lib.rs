//! Controller synthesis and certification for truncated spectral models of
//! high-order linear plants.
//!
//! The crate covers the full pipeline:
//!
//! * [`spectral`] - the decomposed modal representation (unstable block,
//!   retained stable block, scalar tail) with ordering and validity checks;
//! * [`plants`] - builders that produce such models for a generic modal
//!   benchmark, an ODE-transport interconnection (diagonal Pade of
//!   `e^{-hs}`) and an ODE-reaction-diffusion interconnection (product
//!   expansion of `q/sinh q`), plus independent eigenvalue oracles;
//! * [`synthesis`] - partial pole placement, shifted Lyapunov solves, the
//!   exact and model-mismatch decay certificates, controller assembly and
//!   realification;
//! * [`sim`] - closed-loop assembly, matrix-exponential propagation, decay
//!   fitting and seeded uncertainty sweeps;
//! * [`io`] - the JSON wire formats shared with the command-line tools.

pub use nalgebra;

pub mod error;
pub mod io;
pub mod linalg;
pub mod plants;
pub mod sim;
pub mod spectral;
pub mod synthesis;

pub use error::{CoreError, Result};
pub use linalg::{C64, CMatrix, CVector};
pub use plants::{EigenvectorSample, OdePdePlant, PlantKind, RationalApprox};
pub use sim::{ClosedLoopSystem, DecayFit, SweepConfig, SweepTrial, Trajectory, VWeights};
pub use spectral::{ModalTriple, ModelSplit, SpectralModel};
pub use synthesis::{
    Certificate, ControllerRealization, Gains, LyapunovPair, Representation, UncertaintySpec,
};
