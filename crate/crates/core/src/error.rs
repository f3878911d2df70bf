use thiserror::Error;

use crate::exprlang::ExprError;
use crate::spectral::VerificationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("irregular critical point at x = {location}: B = {b} (must be 0 or -1)")]
    Regularity { location: f64, b: f64 },

    #[error("degenerate critical point at x = {location}: xi'' vanishes")]
    DegenerateCritical { location: f64 },

    #[error("both states would have {nodes} nodes, which the oscillation theorem forbids")]
    Oscillation { nodes: usize },

    #[error("wave function not normalizable: {tail_fraction:.3e} of the norm lies beyond the domain")]
    NonNormalizable { tail_fraction: f64 },

    #[error("potential is not finite at x = {x}")]
    NonFinitePotential { x: f64 },

    #[error("invalid levels: {0}")]
    InvalidLevels(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate Mobius transformation: c1*d2 - c2*d1 = {0}")]
    DegenerateMobius(f64),

    #[error("inconsistent deformation parameters: {0}")]
    InconsistentLevels(String),

    #[error("radial specification degenerate: {0}")]
    DegenerateSpec(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("unknown catalog entry '{0}'")]
    UnknownEntry(String),

    #[error("catalog entry '{entry}': {message}")]
    Validity { entry: String, message: String },

    #[error("eigensolver did not converge: {0}")]
    Convergence(String),

    #[error("verification failed: {}", .0.summary())]
    Verification(Box<VerificationReport>),
}
