use thiserror::Error;

/// Errors raised by state construction, element construction and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Structurally invalid input (empty registry, duplicate ports, bad shapes, unknown stage).
    #[error("configuration error: {0}")]
    Config(String),

    /// A mode is not registered, or two states live on different registries.
    #[error("mode error: {0}")]
    Mode(String),

    /// A superposition or qubit was expected to have unit norm.
    #[error("normalization error: {0}")]
    Normalization(String),

    /// A matrix handed in as a mode transformation is not unitary.
    #[error("unitarity error: deviation {deviation:e} exceeds {tolerance:e}")]
    Unitarity { deviation: f64, tolerance: f64 },

    /// The requested qubit encoding does not appear in the state.
    #[error("encoding error: {0}")]
    Encoding(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
