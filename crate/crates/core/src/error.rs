use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("manifold {n} is out of range (0..={max})")]
    ManifoldOutOfRange { n: usize, max: usize },

    #[error("manifold {n} is photon-truncated at cutoff {cutoff}")]
    TruncatedManifold { n: usize, cutoff: usize },

    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    ShapeMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("closed form requires zero detuning, got delta = {0}")]
    NonzeroDetuning(f64),

    #[error("manifold index {0} not allowed here")]
    InvalidManifold(usize),

    #[error("exceptional point: |R_{n}| = {modulus:e} vanishes")]
    ExceptionalPoint { n: usize, modulus: f64 },

    #[error("integration failed on [{t_start}, {t_end}]: step size underflow at t = {t}")]
    Integration { t_start: f64, t_end: f64, t: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("state has weight in manifold {manifold} but the photon cutoff {cutoff} only keeps manifolds up to {cutoff} exact")]
    CutoffTooSmall { manifold: usize, cutoff: usize },

    #[error("quadrature did not converge: relative change {delta:e} after {refinements} refinements")]
    Quadrature { delta: f64, refinements: usize },

    #[error("invalid spectrometer setting: {0}")]
    InvalidSpectrometer(String),
}

pub type Result<T> = std::result::Result<T, Error>;
