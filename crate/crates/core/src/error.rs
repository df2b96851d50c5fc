use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown model `{name}`; built-in models are: {available}")]
    UnknownModel { name: String, available: String },

    #[error("model file: {0}")]
    ModelParse(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("{required} stages required but the cap is {max}")]
    StageCapExceeded { required: usize, max: usize },

    #[error("degenerate amplification point at z = {z}")]
    DegenerateAmplification { z: f64 },

    #[error("unstable configuration: z = {z} lies outside the stability interval [-{ell}, 0]")]
    Unstable { z: f64, ell: f64 },

    #[error("Newton iteration did not converge in {iterations} iterations (last increment {increment:e})")]
    NewtonFailed { iterations: usize, increment: f64 },

    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("{failed} of {total} trajectories failed; first failure: {first}")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("empirical pdf is not normalized (total mass {0})")]
    Unnormalized(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
