use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid basis state {state}: {reason}")]
    InvalidState { state: String, reason: String },

    #[error("reachable subspace exceeds the size cap of {cap} states")]
    Capacity { cap: usize },

    #[error("term {term} maps {from} to {to}, which is outside the basis")]
    ClosureViolation {
        term: String,
        from: String,
        to: String,
    },

    #[error("operator is not Hermitian (max |M - M^dag| = {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("parameter {name} has length {got}, expected {expected}")]
    LengthMismatch {
        name: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("seed state {0} does not lie in the zero-eigenvalue block of H2")]
    SeedNotInDarkBlock(String),

    #[error("detuning is zero: the phase rate is undefined in the resonant regime, use the Rabi-cycle gate time instead")]
    ResonantRegime,

    #[error("Rabi frequency is zero: no resonant gate time exists")]
    ZeroDrive,

    #[error("integrator failure: norm drifted by {drift:e} at gt = {time}")]
    IntegratorFailure { drift: f64, time: f64 },

    #[error("density matrix trace drifted by {drift:e} at gt = {time}")]
    TraceDrift { drift: f64, time: f64 },

    #[error("density matrix has eigenvalue {min_eigenvalue:e} at gt = {time}")]
    NegativeEigenvalue { min_eigenvalue: f64, time: f64 },

    #[error("operands live on different bases")]
    BasisMismatch,

    #[error("basis is missing computational state {0}")]
    MissingComputationalState(String),

    #[error("invalid probe: {0}")]
    InvalidProbe(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
