use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("subsystem `{label}` needs a {expected}x{expected} local operator, got {rows}x{cols}")]
    DimensionMismatch {
        label: String,
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("operator matrix is {rows}x{cols} but the space has dimension {dim}")]
    MatrixShape { rows: usize, cols: usize, dim: usize },

    #[error("operands live on different composite spaces")]
    SpaceMismatch,

    #[error("subsystem `{label}` has dimension {dim}, expected {expected}")]
    WrongSubsystemDim {
        label: String,
        dim: usize,
        expected: usize,
    },

    #[error("channel count mismatch: {left} vs {right}")]
    ChannelMismatch { left: usize, right: usize },

    #[error("vector has {got} entries but the triple has {expected} channels")]
    LengthMismatch { expected: usize, got: usize },

    #[error("channel position {at} out of range 1..={max}")]
    ChannelIndex { at: usize, max: usize },

    #[error("invalid channel permutation")]
    BadPermutation,

    #[error("scattering matrix is not unitary (max deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("Hamiltonian is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Fock truncation {n_fock} too small for a mean photon number of {photons:.3}")]
    TruncationTooSmall { n_fock: usize, photons: f64 },

    #[error("state is not a valid density operator: {0}")]
    InvalidState(String),

    #[error("fixed step too large: dt * generator norm = {0:.3} (must be < 0.1)")]
    StabilityGuard(f64),

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("step limit reached at t = {t} after {steps} steps")]
    StepLimit { t: f64, steps: usize },

    #[error("trace drifted by {drift:.3e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
