//! Pseudospectral approximation of reproduction numbers for linear
//! age-structured population models.
//!
//! A model is described by its birth kernel `β(a, α)`, boundary birth term
//! `b(a)` and transition rate `δ(a)` on `[0, a†]`, split into birth (`+`) and
//! transition (`−`) parts. Collocation on Chebyshev meshes turns the birth and
//! transition operators into dense matrices `B`, `M`; the spectral radius of
//! `B M⁻¹` approximates the reproduction number.

pub mod assembly;
pub mod benchmarks;
pub mod chebyshev;
pub mod config;
pub mod error;
pub mod exec;
pub mod expr;
mod linalg;
pub mod model;
pub mod quadrature;
pub mod spectral;

pub use assembly::{assemble, assemble_piecewise, DiscreteOperators};
pub use chebyshev::{CollocationMesh, NodeFamily};
pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{CoefficientSet, Kernel, Model, Rate, SplittingSpec};
pub use spectral::{reproduction_number, OperatorOrder, SpectralResult};
