//! Numerical laboratory for preparing Schrödinger cat states of a single
//! trapped ion driven beyond the Lamb-Dicke limit.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computations: truncated Fock-space linear algebra ([`fock`]), the
//! Hamiltonians and frame transformation ([`model`]), the factorized and exact
//! propagators ([`propagators`]), the three-pulse preparation sequence with
//! shelving readout ([`protocol`]), phase-space diagnostics ([`analysis`]) and
//! the preparation-time comparison ([`timings`]).
//!
//! Conventions used throughout:
//!
//! * joint states are internal-major: the `|e⟩` block occupies indices
//!   `0..dim` and the `|g⟩` block `dim..2·dim`, with `|e⟩ = (1, 0)ᵀ`;
//! * all times are dimensionless (units of the inverse trap frequency);
//! * the position quadrature is `x̂ = (a + a†)/√2`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
mod error;
pub mod fock;
pub mod model;
pub mod propagators;
pub mod protocol;
pub mod timings;

pub use error::{Error, Result};
pub use fock::{JointOperator, JointState, MotionalOp, MotionalState, SpaceConfig, C64};
pub use model::{ModelParams, RegimeFlags, RegimeThresholds};
pub use propagators::ComparisonReport;
pub use protocol::{CatSign, Engine, MeasurementRecord, ProtocolOutcome, Variant};
