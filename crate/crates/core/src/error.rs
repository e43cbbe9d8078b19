use thiserror::Error;

/// Errors raised by state construction and the thermodynamic operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid inverse temperature: {0}")]
    InvalidTemperature(String),

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NonUnitary { deviation: f64 },

    #[error("scaled spectra differ at level {index}: {left} vs {right}")]
    ScaledSpectrumMismatch { index: usize, left: f64, right: f64 },

    #[error("{side} marginal is not thermal (log-population residual {residual:e})")]
    NonThermalMarginal { side: &'static str, residual: f64 },

    #[error("final state is not on the unitary orbit of the initial state (spectral distance {distance:e})")]
    NotOnOrbit { distance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
