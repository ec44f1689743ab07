//! Noise and disturbance operators, rms error and disturbance, and the
//! error-disturbance inequalities they enter.
//!
//! For a measuring process `(K, ρ0, U, M)` and system observables `A`, `B`:
//!
//! * noise `N(A) = M(Δt) − A(0)`, disturbance `D(B) = B(Δt) − B(0)`;
//! * `ε(A,ρ) = Tr[N(A)² ρ⊗ρ0]^{1/2}`, `η(B,ρ) = Tr[D(B)² ρ⊗ρ0]^{1/2}`;
//! * mean operators `n(A) = Tr_K[N(A)(1⊗ρ0)]`, `d(B) = Tr_K[D(B)(1⊗ρ0)]`.
//!
//! Second moments are evaluated as squared Frobenius norms `‖N R‖²` with
//! `ρ⊗ρ0 = RR†`, which keeps vanishing errors at rounding level instead of
//! its square root.
//!
//! The locally uniform variants take the supremum of `ε(A,φ)` over unit
//! vectors of the cyclic subspace `C(A,ρ)`. With `W` an orthonormal basis
//! of the subspace and `ρ0 = R0R0†`, `ε(A,Wa) = ‖N(Wa ⊗ R0)‖`, so the
//! supremum is the largest singular value of the linear map `a ↦ N(Wa ⊗ R0)`.

use alloc::vec::Vec;

use crate::constants::Tolerances;
use crate::error::{Error, Result};
use crate::instrument::MeasuringProcess;
use crate::operator::{
    check_dims, hermitian_part, lift_first, lift_second, max_abs, robertson_of, trace_product, variance_of, CMatrix,
    CVector, DensityOperator, HermitianObservable,
};
use crate::spectral::{hermitian_eigen, spectral_atoms};
#[allow(unused_imports)]
use num_traits::Float;

/// Slack allowed when asserting any error-disturbance inequality.
pub const INEQUALITY_SLACK: f64 = 1e-8;

/// `N(A)` on `H ⊗ K`.
pub fn noise_operator(mp: &MeasuringProcess, a: &HermitianObservable) -> Result<HermitianObservable> {
    Ok(HermitianObservable::from_hermitian_part(&noise_matrix(mp, a)?))
}

/// `D(B)` on `H ⊗ K`.
pub fn disturbance_operator(mp: &MeasuringProcess, b: &HermitianObservable) -> Result<HermitianObservable> {
    Ok(HermitianObservable::from_hermitian_part(&disturbance_matrix(mp, b)?))
}

fn noise_matrix(mp: &MeasuringProcess, a: &HermitianObservable) -> Result<CMatrix> {
    check_dims(mp.system_dim(), a.dim())?;
    let meter_after = mp.evolve(&lift_second(mp.system_dim(), mp.meter().matrix()));
    Ok(hermitian_part(&(meter_after - lift_first(a.matrix(), mp.probe_dim()))))
}

fn disturbance_matrix(mp: &MeasuringProcess, b: &HermitianObservable) -> Result<CMatrix> {
    check_dims(mp.system_dim(), b.dim())?;
    let b0 = lift_first(b.matrix(), mp.probe_dim());
    Ok(hermitian_part(&(mp.evolve(&b0) - b0)))
}

fn rms_of(x: &CMatrix, mp: &MeasuringProcess, rho: &DensityOperator) -> Result<f64> {
    check_dims(mp.system_dim(), rho.dim())?;
    let r = rho.factor().kronecker(&mp.probe_state().factor());
    Ok((x * r).norm())
}

/// `ε(A,ρ)`
pub fn rms_error(mp: &MeasuringProcess, a: &HermitianObservable, rho: &DensityOperator) -> Result<f64> {
    rms_of(&noise_matrix(mp, a)?, mp, rho)
}

/// `η(B,ρ)`
pub fn rms_disturbance(mp: &MeasuringProcess, b: &HermitianObservable, rho: &DensityOperator) -> Result<f64> {
    rms_of(&disturbance_matrix(mp, b)?, mp, rho)
}

/// `n(A)` on `H`.
pub fn mean_noise_operator(mp: &MeasuringProcess, a: &HermitianObservable) -> Result<HermitianObservable> {
    Ok(HermitianObservable::from_hermitian_part(&mp.probe_average(&noise_matrix(mp, a)?)))
}

/// `d(B)` on `H`.
pub fn mean_disturbance_operator(mp: &MeasuringProcess, b: &HermitianObservable) -> Result<HermitianObservable> {
    Ok(HermitianObservable::from_hermitian_part(&mp.probe_average(&disturbance_matrix(mp, b)?)))
}

/// All terms of the error-disturbance relations for one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EDRReport {
    pub epsilon: f64,
    pub eta: f64,
    #[cfg_attr(feature = "serde", serde(rename = "sigma_A"))]
    pub sigma_a: f64,
    #[cfg_attr(feature = "serde", serde(rename = "sigma_B"))]
    pub sigma_b: f64,
    pub robertson: f64,
    /// `|⟨[n(A),B]⟩ + ⟨[A,d(B)]⟩|`
    pub correlation_term: f64,
    pub heisenberg_product: f64,
    /// `εη + correlation_term`
    pub uedr_lhs: f64,
    /// `εη + εσ(B) + σ(A)η`
    pub oedr_lhs: f64,
    /// `εη ≥ robertson`; informational, this relation can fail.
    pub heisenberg_holds: bool,
    pub uedr_holds: bool,
    pub oedr_holds: bool,
}

impl EDRReport {
    /// `σ(A)η ≥ robertson`, required whenever `ε` vanishes.
    pub fn precise_bound_holds(&self) -> bool {
        self.sigma_a * self.eta >= self.robertson - INEQUALITY_SLACK
    }

    /// `εσ(B) ≥ robertson`, required whenever `η` vanishes.
    pub fn nondisturbing_bound_holds(&self) -> bool {
        self.epsilon * self.sigma_b >= self.robertson - INEQUALITY_SLACK
    }
}

/// Evaluates every term of the Heisenberg-type, universally valid and
/// three-term error-disturbance relations.
pub fn edr_ledger(
    mp: &MeasuringProcess,
    a: &HermitianObservable,
    b: &HermitianObservable,
    rho: &DensityOperator,
) -> Result<EDRReport> {
    check_dims(mp.system_dim(), b.dim())?;
    check_dims(mp.system_dim(), rho.dim())?;
    let noise = noise_matrix(mp, a)?;
    let dist = disturbance_matrix(mp, b)?;
    let epsilon = rms_of(&noise, mp, rho)?;
    let eta = rms_of(&dist, mp, rho)?;
    let n_mean = mp.probe_average(&noise);
    let d_mean = mp.probe_average(&dist);
    let (am, bm, r) = (a.matrix(), b.matrix(), rho.matrix());
    let corr = trace_product(&(&n_mean * bm - bm * &n_mean), r) + trace_product(&(am * &d_mean - &d_mean * am), r);
    let sigma_a = variance_of(am, r).sqrt();
    let sigma_b = variance_of(bm, r).sqrt();
    let robertson = robertson_of(am, bm, r);
    let correlation_term = corr.norm();
    let heisenberg_product = epsilon * eta;
    let uedr_lhs = heisenberg_product + correlation_term;
    let oedr_lhs = heisenberg_product + epsilon * sigma_b + sigma_a * eta;
    let bound = robertson - INEQUALITY_SLACK;
    Ok(EDRReport {
        epsilon,
        eta,
        sigma_a,
        sigma_b,
        robertson,
        correlation_term,
        heisenberg_product,
        uedr_lhs,
        oedr_lhs,
        heisenberg_holds: heisenberg_product >= bound,
        uedr_holds: uedr_lhs >= bound,
        oedr_holds: oedr_lhs >= bound,
    })
}

/// A subspace given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<CVector>,
}

impl Subspace {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[CVector] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis vectors as the columns of an `ambient × dim` matrix.
    pub fn basis_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.ambient_dim, self.basis.len(), |i, j| self.basis[j][i])
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> CMatrix {
        let b = self.basis_matrix();
        &b * b.adjoint()
    }

    /// `B† X B` for the basis matrix `B`.
    pub fn compress(&self, x: &CMatrix) -> CMatrix {
        let b = self.basis_matrix();
        b.adjoint() * x * b
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let b = self.basis_matrix();
        let n = self.basis.len();
        max_abs(&(b.adjoint() * b - CMatrix::identity(n, n)))
    }
}

/// Cyclic subspace `C(A,ρ)`: the span of `Pᵢφ` over spectral projectors
/// `Pᵢ` of `A` and eigenvectors `φ` of ρ with eigenvalue above `eq_tol`.
///
/// The span is read off the range of `G = Σᵢₖ Pᵢφₖφₖ†Pᵢ`, keeping
/// eigenvectors of `G` with eigenvalue above `eq_tol`.
pub fn cyclic_subspace(a: &HermitianObservable, rho: &DensityOperator, tol: &Tolerances) -> Result<Subspace> {
    check_dims(a.dim(), rho.dim())?;
    let n = a.dim();
    let (_, projs) = spectral_atoms(a.matrix(), tol);
    let range = rho.range_basis(tol.eq_tol);
    let mut gram = CMatrix::zeros(n, n);
    for p in &projs {
        for phi in &range {
            let v = p * phi;
            gram += &v * v.adjoint();
        }
    }
    let (vals, vecs) = hermitian_eigen(&gram);
    let basis =
        vals.iter().enumerate().filter(|(_, &v)| v > tol.eq_tol).map(|(k, _)| vecs.column(k).into_owned()).collect();
    Ok(Subspace { ambient_dim: n, basis })
}

/// `sup ‖X(φ ⊗ R0)‖` over unit vectors `φ` of the subspace.
fn sup_on(mp: &MeasuringProcess, x: &CMatrix, subspace: &Subspace) -> f64 {
    let c = subspace.dim();
    if c == 0 {
        return 0.0;
    }
    let w = subspace.basis_matrix();
    let r0 = mp.probe_state().factor();
    let rows = x.nrows();
    let mut stacked = CMatrix::zeros(rows * r0.ncols(), c);
    for j in 0..r0.ncols() {
        let block = x * w.kronecker(&r0.column(j));
        stacked.rows_mut(j * rows, rows).copy_from(&block);
    }
    stacked.singular_values().max()
}

/// `ε̄(A,ρ) = sup_{φ ∈ C(A,ρ)} ε(A,φ)`
pub fn locally_uniform_rms_error(
    mp: &MeasuringProcess,
    a: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<f64> {
    check_dims(mp.system_dim(), rho.dim())?;
    Ok(sup_on(mp, &noise_matrix(mp, a)?, &cyclic_subspace(a, rho, tol)?))
}

/// `η̄(B,ρ) = sup_{φ ∈ C(B,ρ)} η(B,φ)`
pub fn locally_uniform_rms_disturbance(
    mp: &MeasuringProcess,
    b: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<f64> {
    check_dims(mp.system_dim(), rho.dim())?;
    Ok(sup_on(mp, &disturbance_matrix(mp, b)?, &cyclic_subspace(b, rho, tol)?))
}

/// Largest eigenvalue of `Tr_K[N(A)²(1⊗ρ0)]` compressed to `subspace`;
/// on `C(A,ρ)` this is `ε̄(A,ρ)²`.
pub(crate) fn noise_form_max_on(mp: &MeasuringProcess, a: &HermitianObservable, subspace: &Subspace) -> Result<f64> {
    check_dims(mp.system_dim(), subspace.ambient_dim())?;
    Ok(sup_on(mp, &noise_matrix(mp, a)?, subspace).powi(2))
}

/// Locally uniform counterpart of the three-term relation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LocallyUniformEDR {
    pub epsilon_bar: f64,
    pub eta_bar: f64,
    pub lhs: f64,
    pub robertson: f64,
    pub holds: bool,
}

/// `ε̄η̄ + ε̄σ(B) + σ(A)η̄ ≥ ½|⟨[A,B]⟩|`
pub fn locally_uniform_edr(
    mp: &MeasuringProcess,
    a: &HermitianObservable,
    b: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<LocallyUniformEDR> {
    check_dims(a.dim(), b.dim())?;
    let epsilon_bar = locally_uniform_rms_error(mp, a, rho, tol)?;
    let eta_bar = locally_uniform_rms_disturbance(mp, b, rho, tol)?;
    let r = rho.matrix();
    let sigma_a = variance_of(a.matrix(), r).sqrt();
    let sigma_b = variance_of(b.matrix(), r).sqrt();
    let robertson = robertson_of(a.matrix(), b.matrix(), r);
    let lhs = epsilon_bar * eta_bar + epsilon_bar * sigma_b + sigma_a * eta_bar;
    Ok(LocallyUniformEDR { epsilon_bar, eta_bar, lhs, robertson, holds: lhs >= robertson - INEQUALITY_SLACK })
}

/// Density operator `B σ B†` supported on `subspace`, for a density `σ` on
/// the subspace coordinates.
pub fn embed_state(subspace: &Subspace, sigma: &DensityOperator) -> Result<DensityOperator> {
    check_dims(subspace.dim(), sigma.dim())?;
    let b = subspace.basis_matrix();
    if subspace.dim() == 0 {
        return Err(Error::InvalidParameter("cannot embed a state into the zero subspace".into()));
    }
    Ok(DensityOperator::from_matrix_unchecked(hermitian_part(&(&b * sigma.matrix() * b.adjoint()))))
}
