//! Quantum measurement theory on finite-dimensional systems, with
//! closed-form Gaussian models for canonical position measurements.
//!
//! The crate is `no_std` (it needs `alloc`). Operators are dense complex
//! matrices; measuring processes are evaluated in the Heisenberg picture on
//! `H ⊗ K` with the system factor first.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod constants;
pub mod edr;
pub mod error;
pub mod gaussian;
pub mod instrument;
pub mod jpd;
pub mod operator;
pub mod random;
pub mod spectral;
pub mod sweep;

pub use constants::{PhysicalConstants, Tolerances};
pub use error::{Error, Result};
pub use operator::{CMatrix, CVector, ComplexOperator, DensityOperator, HermitianObservable, C64};
