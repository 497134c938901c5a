use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library reports. Variants carry the measured quantity
/// that tripped the check so callers can log it without recomputing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not an effect (spectrum [{min:.6e}, {max:.6e}] leaves [0, 1])")]
    NotEffect { min: f64, max: f64 },

    #[error("matrix is not a projection (idempotence defect {0:.3e})")]
    NotProjection(f64),

    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),

    #[error("negative spectrum (min eigenvalue {0:.6e})")]
    NegativeSpectrum(f64),

    #[error("function undefined at eigenvalue {0:.17e}")]
    DomainError(f64),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("pair is not absolutely compatible (residual {0:.6e})")]
    NotAbsolutelyCompatible(f64),

    #[error("element is not strict: {0}")]
    NotStrict(String),

    #[error("elements do not commute (commutator norm {0:.3e})")]
    NotCommuting(f64),

    #[error("a^2 + b^2 exceeds the identity (max eigenvalue {0:.6e})")]
    SumExceedsOne(f64),

    #[error("parameters are not strict: {0}")]
    NotStrictParams(String),

    #[error("unitary is not strict")]
    NotStrictUnitary,

    #[error("projection is not strict")]
    NotStrictProjection,

    #[error("dimension {0} is odd")]
    OddDimension(usize),

    #[error("spectral pairing failed: {0}")]
    PairingFailure(String),

    #[error("postcondition failed: {0}")]
    PostconditionFailure(String),

    #[error("trace is not one (got {0:.17e})")]
    TraceNotOne(f64),

    #[error("determinant {0:.6e} outside [0, 1/4]")]
    DetOutOfRange(f64),

    #[error("point lies outside the closed ball (squared radius {0:.6e})")]
    OutsideBall(f64),

    #[error("degenerate specification: {0}")]
    DegenerateSpec(String),

    #[error("eigenvalues of |A - B| differ by {0:.3e}")]
    SpectralAmbiguity(f64),

    #[error("point is not on the sphere (distance defect {0:.3e})")]
    NotOnSphere(f64),

    #[error("empty input")]
    EmptyInput,

    #[error("margin {0} outside (0, 1/2)")]
    BadMargin(f64),
}
