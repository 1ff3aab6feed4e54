//! Simulation and analysis of two identical two-level emitters coupled to
//! one lossy cavity mode (the dissipative Tavis–Cummings ladder).
//!
//! * [`space`]: truncated Fock ⊗ Dicke basis and bare operators
//! * [`hamiltonian`]: Tavis–Cummings Hamiltonian and resonant dressed states
//! * [`liouvillian`]: master equation, time evolution, regression and
//!   population blocks
//! * [`eigenanalysis`]: closed-form complex eigenenergies and the
//!   strong-coupling criterion
//! * [`spectrum`]: two-time correlations and the filtered emission spectrum
//! * [`verify`]: closed forms checked against the numerical generator

pub mod cubic;
pub mod eigenanalysis;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod liouvillian;
pub mod ode;
pub mod params;
pub mod space;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use liouvillian::{DensityMatrix, System};
pub use params::SystemParams;
pub use space::{build_basis, BasisState, DickeLabel, TruncatedBasis};
