use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid space configuration: {0}")]
    Config(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The Fock truncation cannot hold a coherent amplitude of this size.
    #[error("truncation inadequate: dim {dim} < {required} required for |alpha| = {amplitude}")]
    Truncation {
        dim: usize,
        required: usize,
        amplitude: f64,
    },

    #[error("generator is not Hermitian (max defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("forced measurement outcome has zero probability")]
    DegenerateOutcome,

    #[error("density profile is empty")]
    EmptyProfile,
}
