//! Quantum time-frequency analysis on the finite phase space `Z_L x Z_L`
//! and on sampled grids.

pub mod constants;
pub mod continuum;
pub mod error;
pub mod gabor;
pub mod invariant;
pub mod operators;
pub mod phase_space;
pub mod signals;
pub mod testkit;

pub use constants::{kappa, Constant, ConstantsTable};
pub use error::{Error, Result};
pub use operators::Operator;
pub use phase_space::{FiniteLattice, PhasePoint};
pub use signals::{Model, PhaseFunction, Signal};
