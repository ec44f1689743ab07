use crate::error::{Error, Result};
use alloc::format;

/// Absolute tolerances used for every numerical comparison in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    /// Operator and scalar equality.
    pub eq_tol: f64,
    /// Floor for eigenvalues in positivity checks (non-positive).
    pub psd_tol: f64,
}

impl Tolerances {
    pub const DEFAULT_EQ_TOL: f64 = 1e-9;
    pub const DEFAULT_PSD_TOL: f64 = -1e-10;

    pub fn new(eq_tol: f64, psd_tol: f64) -> Result<Self> {
        if !(eq_tol.is_finite() && eq_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("eq_tol must be > 0, got {eq_tol}")));
        }
        if !(psd_tol.is_finite() && psd_tol <= 0.0) {
            return Err(Error::InvalidParameter(format!("psd_tol must be <= 0, got {psd_tol}")));
        }
        Ok(Self { eq_tol, psd_tol })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eq_tol: Self::DEFAULT_EQ_TOL, psd_tol: Self::DEFAULT_PSD_TOL }
    }
}

/// Value of the reduced Planck constant in the units of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalConstants {
    pub hbar: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be > 0, got {hbar}")));
        }
        Ok(Self { hbar })
    }

    /// Planck's constant h = 2πħ.
    pub fn planck(&self) -> f64 {
        2.0 * core::f64::consts::PI * self.hbar
    }

    /// The Kennard bound ħ/2.
    pub fn kennard_bound(&self) -> f64 {
        0.5 * self.hbar
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}
