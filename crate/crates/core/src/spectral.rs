//! Spectral measures of Hermitian operators.

use alloc::vec::Vec;

use nalgebra::SymmetricEigen;

use crate::constants::Tolerances;
use crate::operator::{c, max_abs, outer, CMatrix, ComplexOperator, HermitianObservable};

/// Eigenvalues in ascending order with the matching orthonormal
/// eigenvectors as columns. Only the Hermitian part of `m` is used.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * c(0.5);
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `f(H)` through the eigendecomposition of the Hermitian part of `m`.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut out = CMatrix::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        let col = vecs.column(k).into_owned();
        out += outer(&col, &col) * c(f(v));
    }
    out
}

/// Largest eigenvalue of a Hermitian matrix; `0` for an empty matrix.
pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let (vals, _) = hermitian_eigen(m);
    vals[vals.len() - 1]
}

/// The atoms of a spectral measure `E^A`: distinct eigenvalues and the
/// orthogonal projectors onto their eigenspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<ComplexOperator>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[ComplexOperator] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &ComplexOperator)> {
        self.eigenvalues.iter().copied().zip(self.projectors.iter())
    }

    /// Projector `E^A({value})`, or `None` when `value` is not within
    /// `tol` of an eigenvalue.
    pub fn projector_for(&self, value: f64, tol: f64) -> Option<&ComplexOperator> {
        self.iter().find(|(v, _)| (v - value).abs() <= tol).map(|(_, p)| p)
    }

    /// `Σ λᵢ Pᵢ`
    pub fn reconstruct(&self) -> ComplexOperator {
        let n = self.projectors.first().map_or(0, |p| p.dim());
        let mut acc = CMatrix::zeros(n, n);
        for (v, p) in self.iter() {
            acc += p.matrix() * c(v);
        }
        ComplexOperator::from_matrix_unchecked(acc)
    }

    pub(crate) fn projector_matrices(&self) -> Vec<CMatrix> {
        self.projectors.iter().map(|p| p.matrix().clone()).collect()
    }
}

/// Spectral decomposition of `a`; eigenvalues closer than `tol.eq_tol`
/// (chained through consecutive gaps) are merged into one atom at their
/// mean with the summed projector.
pub fn spectral_decompose(a: &HermitianObservable, tol: &Tolerances) -> SpectralDecomposition {
    let (vals, vecs) = hermitian_eigen(a.matrix());
    let n = vals.len();
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] <= tol.eq_tol {
            end += 1;
        }
        let mean = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        let mut p = CMatrix::zeros(n, n);
        for k in start..end {
            let col = vecs.column(k).into_owned();
            p += outer(&col, &col);
        }
        eigenvalues.push(mean);
        projectors.push(ComplexOperator::from_matrix_unchecked(p));
        start = end;
    }
    SpectralDecomposition { eigenvalues, projectors }
}

/// Spectral atoms of a matrix known to be Hermitian up to rounding.
pub(crate) fn spectral_atoms(m: &CMatrix, tol: &Tolerances) -> (Vec<f64>, Vec<CMatrix>) {
    let sd = spectral_decompose(&HermitianObservable::from_hermitian_part(m), tol);
    let projs = sd.projector_matrices();
    (sd.eigenvalues, projs)
}

/// Projector-completeness and reconstruction residuals, for checks.
pub fn decomposition_residuals(a: &HermitianObservable, sd: &SpectralDecomposition) -> (f64, f64) {
    let n = a.dim();
    let mut sum = CMatrix::zeros(n, n);
    for p in sd.projectors() {
        sum += p.matrix();
    }
    let completeness = max_abs(&(sum - CMatrix::identity(n, n)));
    let reconstruction = max_abs(&(sd.reconstruct().matrix() - a.matrix()));
    (completeness, reconstruction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{pauli_x, C64};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn pauli_z_atoms() {
        let sd = spectral_decompose(&HermitianObservable::pauli_z(), &tol());
        assert_eq!(sd.eigenvalues(), &[-1.0, 1.0]);
        assert!(sd.projectors()[0].approx_eq(&ComplexOperator::diagonal(&[0.0, 1.0]), 1e-15));
        assert!(sd.projectors()[1].approx_eq(&ComplexOperator::diagonal(&[1.0, 0.0]), 1e-15));
    }

    #[test]
    fn identity_is_one_atom() {
        let sd = spectral_decompose(&HermitianObservable::identity(3), &tol());
        assert_eq!(sd.len(), 1);
        assert!((sd.eigenvalues()[0] - 1.0).abs() < 1e-15);
        assert!(sd.projectors()[0].approx_eq(&ComplexOperator::identity(3), 1e-14));
    }

    #[test]
    fn pauli_x_projectors() {
        let sd = spectral_decompose(&HermitianObservable::pauli_x(), &tol());
        assert!((sd.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((sd.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let id = ComplexOperator::identity(2);
        let minus = (&id - &pauli_x()).scale(C64::new(0.5, 0.0));
        let plus = (&id + &pauli_x()).scale(C64::new(0.5, 0.0));
        assert!(sd.projectors()[0].approx_eq(&minus, 1e-14));
        assert!(sd.projectors()[1].approx_eq(&plus, 1e-14));
    }

    #[test]
    fn near_degenerate_eigenvalues_merge() {
        let a = HermitianObservable::diagonal(&[1.0, 1.0 + 1e-12, 2.0]);
        let sd = spectral_decompose(&a, &tol());
        assert_eq!(sd.len(), 2);
        assert!(sd.projectors()[0].approx_eq(&ComplexOperator::diagonal(&[1.0, 1.0, 0.0]), 1e-15));
        assert!(sd.projector_for(2.0, 1e-9).is_some());
        assert!(sd.projector_for(3.0, 1e-9).is_none());
    }

    #[test]
    fn matrix_functions() {
        let m = ComplexOperator::diagonal(&[4.0, 9.0]);
        let r = hermitian_function(m.matrix(), |x| x.sqrt());
        assert!((r[(0, 0)].re - 2.0).abs() < 1e-14 && (r[(1, 1)].re - 3.0).abs() < 1e-14);
        assert_eq!(max_eigenvalue(&CMatrix::zeros(0, 0)), 0.0);
        assert!((max_eigenvalue(m.matrix()) - 9.0).abs() < 1e-14);
    }
}
