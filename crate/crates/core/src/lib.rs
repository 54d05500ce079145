//! Core numerics for the Hilfer time-fractional evolution equation
//! `D^{mu,nu} u + A u = f chi_omega` with `1 < mu <= 2`, `0 <= nu <= 1` and a
//! diagonalizable spatial operator `A` given by its spectral data.
//!
//! Module map:
//! * [`mlf`] - Mittag-Leffler function `E_{alpha,beta}` on the real axis.
//! * [`fracops`] - discrete Riemann-Liouville / Hilfer operators on time grids.
//! * [`spectral`] - eigenbasis of `A`, spatial grids, `V_gamma` norms.
//! * [`forward`] - spectral forward solver and memory states.
//! * [`adjoint`] - backward dual system and its final conditions.
//! * [`controllability`] - duality identity, observation operator, control
//!   synthesis.

pub mod adjoint;
pub mod controllability;
pub mod error;
pub mod forward;
pub mod fracops;
pub mod mlf;
pub mod quad;
pub mod spectral;

pub use adjoint::AdjointProblem;
pub use controllability::{ControlMap, ControlTemplate, ObservationMap};
pub use error::{Error, Result};
pub use forward::{ControlField, ForwardProblem, MemoryState, ModalField};
pub use fracops::{FractionalOrder, GridFunction, TimeGrid};
pub use mlf::MlfParams;
pub use spectral::{Field, OmegaRegion, SpaceGrid, SpectralBasis};
