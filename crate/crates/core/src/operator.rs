//! Dense complex operators on finite-dimensional Hilbert spaces.
//!
//! Composite spaces are always ordered system first, probe second
//! (`H ⊗ K`); [`tensor`] and [`partial_trace`] agree on that layout.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use crate::constants::Tolerances;
use crate::error::{Error, Result};
use crate::spectral::hermitian_eigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry modulus, `‖X‖_max`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

pub(crate) fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexOperator(CMatrix);

impl ComplexOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    /// Builds an operator from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Self::new(CMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let v: Vec<C64> = entries.iter().map(|&x| c(x)).collect();
        Self::from_row_slice(dim, &v)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| c(x)));
        Self(CMatrix::from_diagonal(&d))
    }

    /// `|u⟩⟨v|`
    pub fn ket_bra(u: &CVector, v: &CVector) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
        }
        Self::new(outer(u, v))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    /// `‖X − X†‖_max`
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.0 - self.0.adjoint()))
    }

    pub fn is_hermitian(&self, tol: &Tolerances) -> bool {
        self.hermiticity_defect() <= tol.eq_tol
    }

    /// `‖X†X − I‖_max`
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.0.adjoint() * &self.0 - CMatrix::identity(n, n)))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && max_abs(&(&self.0 - &other.0)) <= tol
    }

    /// `[X, Y] = XY − YX`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 * &other.0 - &other.0 * &self.0))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }
}

impl<'a> Mul<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: &'a ComplexOperator) -> ComplexOperator {
        ComplexOperator(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;
    fn add(self, rhs: &'a ComplexOperator) -> ComplexOperator {
        ComplexOperator(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;
    fn sub(self, rhs: &'a ComplexOperator) -> ComplexOperator {
        ComplexOperator(&self.0 - &rhs.0)
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A self-adjoint operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable(ComplexOperator);

impl HermitianObservable {
    pub fn new(op: ComplexOperator, tol: &Tolerances) -> Result<Self> {
        let deviation = op.hermiticity_defect();
        if deviation > tol.eq_tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(ComplexOperator(hermitian_part(op.matrix()))))
    }

    /// Takes the Hermitian part of `m`; for operators that are self-adjoint
    /// by construction up to rounding.
    pub(crate) fn from_hermitian_part(m: &CMatrix) -> Self {
        Self(ComplexOperator(hermitian_part(m)))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self(ComplexOperator::diagonal(values))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexOperator::identity(dim))
    }

    pub fn pauli_x() -> Self {
        Self(pauli_x())
    }

    pub fn pauli_y() -> Self {
        Self(pauli_y())
    }

    pub fn pauli_z() -> Self {
        Self(pauli_z())
    }

    pub fn op(&self) -> &ComplexOperator {
        &self.0
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0 .0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `A + c·I`
    pub fn shifted(&self, shift: f64) -> Self {
        let n = self.dim();
        Self(ComplexOperator(self.matrix() + CMatrix::identity(n, n) * c(shift)))
    }
}

pub fn pauli_x() -> ComplexOperator {
    ComplexOperator(CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
}

pub fn pauli_y() -> ComplexOperator {
    let i = C64::new(0.0, 1.0);
    ComplexOperator(CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]))
}

pub fn pauli_z() -> ComplexOperator {
    ComplexOperator::diagonal(&[1.0, -1.0])
}

/// A positive operator with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(ComplexOperator);

impl DensityOperator {
    pub fn new(op: ComplexOperator, tol: &Tolerances) -> Result<Self> {
        let deviation = op.hermiticity_defect();
        if deviation > tol.eq_tol {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {deviation:e})")));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > tol.eq_tol {
            return Err(Error::InvalidDensity(format!("trace {} + {}i is not 1", tr.re, tr.im)));
        }
        let h = hermitian_part(op.matrix());
        let (vals, _) = hermitian_eigen(&h);
        let min = vals.first().copied().unwrap_or(0.0);
        if min < tol.psd_tol {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(ComplexOperator(h)))
    }

    /// `|ψ⟩⟨ψ|` for the normalization of `psi`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if psi.is_empty() || !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidDensity(format!("cannot normalize vector of norm {n}")));
        }
        let v = psi / c(n);
        Ok(Self(ComplexOperator(outer(&v, &v))))
    }

    /// Computational basis state `|index⟩⟨index|`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Ok(Self(ComplexOperator(m)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexOperator(CMatrix::identity(dim, dim) * c(1.0 / dim as f64)))
    }

    /// Product state `ρ ⊗ σ`.
    pub fn product(&self, other: &DensityOperator) -> Self {
        Self(tensor(&self.0, &other.0))
    }

    /// Renormalizes a Hermitian positive matrix with positive trace.
    pub(crate) fn from_unnormalized(m: &CMatrix) -> Result<Self> {
        let tr = m.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::ZeroProbability { probability: tr });
        }
        Ok(Self(ComplexOperator(hermitian_part(m) * c(1.0 / tr))))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(ComplexOperator(m))
    }

    pub fn op(&self) -> &ComplexOperator {
        &self.0
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0 .0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Eigenvectors of ρ whose eigenvalue exceeds `threshold`, i.e. an
    /// orthonormal basis of the range of ρ.
    pub fn range_basis(&self, threshold: f64) -> Vec<CVector> {
        let (vals, vecs) = hermitian_eigen(self.matrix());
        vals.iter().enumerate().filter(|(_, &v)| v > threshold).map(|(k, _)| vecs.column(k).into_owned()).collect()
    }

    /// `R` with `ρ = RR†`.
    pub(crate) fn factor(&self) -> CMatrix {
        psd_factor(self.matrix())
    }
}

/// Kronecker product `X ⊗ Y` with the first factor as the outer index.
pub fn tensor(x: &ComplexOperator, y: &ComplexOperator) -> ComplexOperator {
    ComplexOperator(x.0.kronecker(&y.0))
}

/// Which factor of `H ⊗ K` survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

pub fn partial_trace(z: &ComplexOperator, dims: (usize, usize), keep: Keep) -> Result<ComplexOperator> {
    Ok(ComplexOperator(partial_trace_matrix(&z.0, dims, keep)?))
}

pub(crate) fn partial_trace_matrix(z: &CMatrix, dims: (usize, usize), keep: Keep) -> Result<CMatrix> {
    let (d1, d2) = dims;
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidParameter(format!("factor dimensions must be positive, got ({d1}, {d2})")));
    }
    check_dims(d1 * d2, z.nrows())?;
    check_dims(z.nrows(), z.ncols())?;
    let out = match keep {
        Keep::First => CMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|k| z[(i * d2 + k, j * d2 + k)]).sum()),
        Keep::Second => CMatrix::from_fn(d2, d2, |a, b| (0..d1).map(|k| z[(k * d2 + a, k * d2 + b)]).sum()),
    };
    Ok(out)
}

/// `Tr[Xρ]`
pub fn expectation(x: &ComplexOperator, rho: &DensityOperator) -> Result<C64> {
    check_dims(rho.dim(), x.dim())?;
    Ok(trace_product(x.matrix(), rho.matrix()))
}

/// `Tr[XY]` without forming the product.
pub(crate) fn trace_product(x: &CMatrix, y: &CMatrix) -> C64 {
    let n = x.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += x[(i, k)] * y[(k, i)];
        }
    }
    acc
}

/// Standard deviation `σ(A) = (⟨A²⟩ − ⟨A⟩²)^{1/2}`; a slightly negative
/// radicand from rounding is clamped to zero.
pub fn std_dev(a: &HermitianObservable, rho: &DensityOperator) -> Result<f64> {
    check_dims(rho.dim(), a.dim())?;
    Ok(variance_of(a.matrix(), rho.matrix()).sqrt())
}

/// `R` with `m = RR†` for a positive semidefinite `m`: eigenvectors scaled
/// by `√λ`. Eigenvalues within the eigensolver's rounding floor are treated
/// as exact zeros.
pub(crate) fn psd_factor(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let top = vals.last().copied().unwrap_or(0.0);
    let floor = 16.0 * f64::EPSILON * vals.len() as f64 * top;
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > floor).collect();
    CMatrix::from_fn(m.nrows(), keep.len(), |i, j| vecs[(i, keep[j])] * c(vals[keep[j]].sqrt()))
}

/// `‖(X − λ)R‖²` with `ρ = RR†`, i.e. `Tr[(X − λ)ρ(X − λ)†]`, evaluated as a
/// norm so that vanishing values stay at rounding level.
pub(crate) fn shifted_second_moment(x: &CMatrix, shift: f64, rho: &CMatrix) -> f64 {
    let n = x.nrows();
    ((x - CMatrix::identity(n, n) * c(shift)) * psd_factor(rho)).norm_squared()
}

pub(crate) fn variance_of(a: &CMatrix, rho: &CMatrix) -> f64 {
    let mean = trace_product(a, rho).re;
    shifted_second_moment(a, mean, rho)
}

/// Robertson bound `½|Tr[[A,B]ρ]|`.
pub fn robertson_bound(a: &HermitianObservable, b: &HermitianObservable, rho: &DensityOperator) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    check_dims(rho.dim(), a.dim())?;
    Ok(robertson_of(a.matrix(), b.matrix(), rho.matrix()))
}

pub(crate) fn robertson_of(a: &CMatrix, b: &CMatrix, rho: &CMatrix) -> f64 {
    let comm = a * b - b * a;
    0.5 * trace_product(&comm, rho).norm()
}

/// `X ⊗ 1_K`
pub(crate) fn lift_first(x: &CMatrix, d2: usize) -> CMatrix {
    x.kronecker(&CMatrix::identity(d2, d2))
}

/// `1_H ⊗ Y`
pub(crate) fn lift_second(d1: usize, y: &CMatrix) -> CMatrix {
    CMatrix::identity(d1, d1).kronecker(y)
}
