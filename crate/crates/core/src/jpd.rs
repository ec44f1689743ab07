//! Joint distributions of observables that commute in a state, the weak
//! joint distribution, and the precision / non-disturbance predicates
//! built on them.
//!
//! A distribution "concentrates on the diagonal" when every atom `(x, y)`
//! with `|x − y| > eq_tol` carries weight (or, for the complex weak
//! distribution, modulus) at most `eq_tol`.

use alloc::format;
use alloc::vec::Vec;

use crate::constants::Tolerances;
use crate::edr::{cyclic_subspace, noise_form_max_on};
use crate::error::{Error, Result};
use crate::instrument::{find_outcome, MeasuringProcess};
use crate::operator::{check_dims, max_abs, trace_product, CMatrix, DensityOperator, HermitianObservable, C64};
use crate::spectral::spectral_atoms;
#[allow(unused_imports)]
use num_traits::Float;

/// Joint distribution `μ(xᵢ, yⱼ) = Tr[Pᵢ Qⱼ ρ]` of two observables that
/// commute in ρ. `weights[i][j]` belongs to `(x_atoms[i], y_atoms[j])`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct JointDistribution {
    pub x_atoms: Vec<f64>,
    pub y_atoms: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn marginal_x(&self) -> Vec<f64> {
        self.weights.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.y_atoms.len()).map(|j| self.weights.iter().map(|row| row[j]).sum()).collect()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().flatten().sum()
    }

    /// Largest weight on an off-diagonal atom.
    pub fn off_diagonal_max(&self, tol: f64) -> f64 {
        off_diagonal_max(&self.x_atoms, &self.y_atoms, |i, j| self.weights[i][j].abs(), tol)
    }

    pub fn concentrated_on_diagonal(&self, tol: &Tolerances) -> bool {
        self.off_diagonal_max(tol.eq_tol) <= tol.eq_tol
    }
}

/// Weak joint distribution `μ_W(xᵢ, yⱼ) = Tr[Pᵢ Qⱼ ρ]` without any
/// commutation assumption; the weights are complex in general.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakJointDistribution {
    pub x_atoms: Vec<f64>,
    pub y_atoms: Vec<f64>,
    pub weights: Vec<Vec<C64>>,
}

impl WeakJointDistribution {
    pub fn marginal_x(&self) -> Vec<C64> {
        self.weights.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<C64> {
        (0..self.y_atoms.len()).map(|j| self.weights.iter().map(|row| row[j]).sum()).collect()
    }

    pub fn total(&self) -> C64 {
        self.weights.iter().flatten().sum()
    }

    /// Weight at the atom `(x, y)`, zero when either label is absent.
    pub fn weight_at(&self, x: f64, y: f64, tol: f64) -> C64 {
        let i = self.x_atoms.iter().position(|a| (a - x).abs() <= tol);
        let j = self.y_atoms.iter().position(|b| (b - y).abs() <= tol);
        match (i, j) {
            (Some(i), Some(j)) => self.weights[i][j],
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn off_diagonal_max(&self, tol: f64) -> f64 {
        off_diagonal_max(&self.x_atoms, &self.y_atoms, |i, j| self.weights[i][j].norm(), tol)
    }

    pub fn concentrated_on_diagonal(&self, tol: &Tolerances) -> bool {
        self.off_diagonal_max(tol.eq_tol) <= tol.eq_tol
    }
}

fn off_diagonal_max(xs: &[f64], ys: &[f64], size: impl Fn(usize, usize) -> f64, tol: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            if (x - y).abs() > tol {
                worst = worst.max(size(i, j));
            }
        }
    }
    worst
}

/// `max ‖[Pᵢ, Qⱼ]ρ‖_max` over all projector pairs.
fn commutation_residual(xp: &[CMatrix], yp: &[CMatrix], rho: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for p in xp {
        for q in yp {
            let comm = p * q - q * p;
            worst = worst.max(max_abs(&(comm * rho)));
        }
    }
    worst
}

fn weak_weights(xp: &[CMatrix], yp: &[CMatrix], rho: &CMatrix) -> Vec<Vec<C64>> {
    xp.iter().map(|p| yp.iter().map(|q| trace_product(&(p * q), rho)).collect()).collect()
}

/// Whether `X` and `Y` commute in ρ: `[Pᵢ, Qⱼ]ρ = 0` for all spectral
/// projectors within `eq_tol`.
pub fn commute_in_state(
    x: &HermitianObservable,
    y: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<bool> {
    check_dims(x.dim(), y.dim())?;
    check_dims(x.dim(), rho.dim())?;
    let (_, xp) = spectral_atoms(x.matrix(), tol);
    let (_, yp) = spectral_atoms(y.matrix(), tol);
    Ok(commutation_residual(&xp, &yp, rho.matrix()) <= tol.eq_tol)
}

/// Weights `‖Qⱼ Pᵢ R‖²` with `σ = RR†`. When `[Pᵢ, Qⱼ]σ = 0` this equals
/// `Tr[Pᵢ Qⱼ σ]`, and the norm form keeps vanishing atoms at rounding level.
fn joint_from_atoms(
    x_atoms: Vec<f64>,
    xp: &[CMatrix],
    y_atoms: Vec<f64>,
    yp: &[CMatrix],
    sigma: &CMatrix,
    factor: &CMatrix,
    tol: &Tolerances,
) -> Result<JointDistribution> {
    let residual = commutation_residual(xp, yp, sigma);
    if residual > tol.eq_tol {
        return Err(Error::NotCommuting { residual });
    }
    let weights = xp
        .iter()
        .map(|p| {
            let pr = p * factor;
            yp.iter().map(|q| (q * &pr).norm_squared()).collect()
        })
        .collect();
    let jd = JointDistribution { x_atoms, y_atoms, weights };
    let total = jd.total();
    if (total - 1.0).abs() > tol.eq_tol {
        return Err(Error::InvalidDistribution(format!("joint weights sum to {total}")));
    }
    Ok(jd)
}

/// Joint distribution of `X` and `Y` in ρ; fails with
/// [`Error::NotCommuting`] when they do not commute in ρ.
pub fn joint_distribution(
    x: &HermitianObservable,
    y: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<JointDistribution> {
    check_dims(x.dim(), y.dim())?;
    check_dims(x.dim(), rho.dim())?;
    let (xv, xp) = spectral_atoms(x.matrix(), tol);
    let (yv, yp) = spectral_atoms(y.matrix(), tol);
    joint_from_atoms(xv, &xp, yv, &yp, rho.matrix(), &rho.factor(), tol)
}

fn joint_matrix(mp: &MeasuringProcess, rho: &DensityOperator) -> Result<CMatrix> {
    Ok(mp.joint_state(rho)?.matrix().clone())
}

fn joint_factor(mp: &MeasuringProcess, rho: &DensityOperator) -> CMatrix {
    rho.factor().kronecker(&mp.probe_state().factor())
}

/// Joint distribution of `A(0)` and `M(Δt)` in `ρ ⊗ ρ0`.
pub fn measurement_joint_distribution(
    mp: &MeasuringProcess,
    a: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<JointDistribution> {
    check_dims(mp.system_dim(), a.dim())?;
    let joint = joint_matrix(mp, rho)?;
    let (xv, xp) = mp.system_atoms(a, tol);
    let (yv, yp) = mp.meter_atoms_after(tol);
    joint_from_atoms(xv, &xp, yv, &yp, &joint, &joint_factor(mp, rho), tol)
}

/// Joint distribution of `B(0)` and `B(Δt)` in `ρ ⊗ ρ0`.
pub fn disturbance_joint_distribution(
    mp: &MeasuringProcess,
    b: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<JointDistribution> {
    check_dims(mp.system_dim(), b.dim())?;
    let joint = joint_matrix(mp, rho)?;
    let (xv, xp) = mp.system_atoms(b, tol);
    let (yv, yp) = mp.system_atoms_after(b, tol);
    joint_from_atoms(xv, &xp, yv, &yp, &joint, &joint_factor(mp, rho), tol)
}

/// Whether `A(0)` and `M(Δt)` commute in `ρ ⊗ ρ0`.
pub fn meter_commutes_in_state(
    mp: &MeasuringProcess,
    a: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<bool> {
    check_dims(mp.system_dim(), a.dim())?;
    let joint = joint_matrix(mp, rho)?;
    let (_, xp) = mp.system_atoms(a, tol);
    let (_, yp) = mp.meter_atoms_after(tol);
    Ok(commutation_residual(&xp, &yp, &joint) <= tol.eq_tol)
}

/// Whether `B(0)` and `B(Δt)` commute in `ρ ⊗ ρ0`.
pub fn disturbance_commutes_in_state(
    mp: &MeasuringProcess,
    b: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<bool> {
    check_dims(mp.system_dim(), b.dim())?;
    let joint = joint_matrix(mp, rho)?;
    let (_, xp) = mp.system_atoms(b, tol);
    let (_, yp) = mp.system_atoms_after(b, tol);
    Ok(commutation_residual(&xp, &yp, &joint) <= tol.eq_tol)
}

/// Classical rms error `(Σ μ(x,y)(y − x)²)^{1/2}`.
pub fn gauss_rms(jd: &JointDistribution) -> f64 {
    let mut acc = 0.0;
    for (i, x) in jd.x_atoms.iter().enumerate() {
        for (j, y) in jd.y_atoms.iter().enumerate() {
            let e = y - x;
            acc += jd.weights[i][j] * e * e;
        }
    }
    acc.max(0.0).sqrt()
}

/// `μ_W(x, y) = Tr[E^{A(0)}(x) E^{M(Δt)}(y) ρ⊗ρ0]`.
pub fn weak_joint_distribution(
    mp: &MeasuringProcess,
    a: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<WeakJointDistribution> {
    check_dims(mp.system_dim(), a.dim())?;
    let joint = joint_matrix(mp, rho)?;
    let (xv, xp) = mp.system_atoms(a, tol);
    let (yv, yp) = mp.meter_atoms_after(tol);
    Ok(WeakJointDistribution { x_atoms: xv, y_atoms: yv, weights: weak_weights(&xp, &yp, &joint) })
}

/// Strong or weak notion of a precise measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// `A(0)` and `M(Δt)` commute in `ρ⊗ρ0` and their joint distribution
    /// concentrates on the diagonal.
    Strong,
    /// The weak joint distribution concentrates on the diagonal.
    Weak,
}

pub fn is_precise(
    mp: &MeasuringProcess,
    a: &HermitianObservable,
    rho: &DensityOperator,
    mode: Precision,
    tol: &Tolerances,
) -> Result<bool> {
    check_dims(mp.system_dim(), a.dim())?;
    let joint = joint_matrix(mp, rho)?;
    let (xv, xp) = mp.system_atoms(a, tol);
    let (yv, yp) = mp.meter_atoms_after(tol);
    Ok(diagonal_test(&xv, &xp, &yv, &yp, &joint, mode, tol))
}

fn diagonal_test(
    xv: &[f64],
    xp: &[CMatrix],
    yv: &[f64],
    yp: &[CMatrix],
    joint: &CMatrix,
    mode: Precision,
    tol: &Tolerances,
) -> bool {
    if mode == Precision::Strong && commutation_residual(xp, yp, joint) > tol.eq_tol {
        return false;
    }
    let weights = weak_weights(xp, yp, joint);
    // In the commuting case the weights are the (real) joint distribution,
    // so the modulus test covers both modes.
    off_diagonal_max(xv, yv, |i, j| weights[i][j].norm(), tol.eq_tol) <= tol.eq_tol
}

/// `B(0)` and `B(Δt)` commute in `ρ⊗ρ0` and their joint distribution
/// concentrates on the diagonal.
pub fn is_nondisturbing(
    mp: &MeasuringProcess,
    b: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<bool> {
    check_dims(mp.system_dim(), b.dim())?;
    let joint = joint_matrix(mp, rho)?;
    let (xv, xp) = mp.system_atoms(b, tol);
    let (yv, yp) = mp.system_atoms_after(b, tol);
    Ok(diagonal_test(&xv, &xp, &yv, &yp, &joint, Precision::Strong, tol))
}

/// Largest gap between the meter's output distribution and the Born
/// distribution of `A`, atoms matched by value within `eq_tol`.
pub fn reproducibility_gap(
    mp: &MeasuringProcess,
    a: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<f64> {
    check_dims(mp.system_dim(), a.dim())?;
    let joint = joint_matrix(mp, rho)?;
    let (av, ap) = spectral_atoms(a.matrix(), tol);
    let (mv, mp_) = mp.meter_atoms_after(tol);
    let born: Vec<f64> = ap.iter().map(|p| trace_product(p, rho.matrix()).re).collect();
    let meter: Vec<f64> = mp_.iter().map(|q| trace_product(q, &joint).re).collect();
    let mut gap: f64 = 0.0;
    for (i, &x) in av.iter().enumerate() {
        let other = find_outcome(&mv, x, tol).map_or(0.0, |j| meter[j]);
        gap = gap.max((born[i] - other).abs());
    }
    for (j, &y) in mv.iter().enumerate() {
        if find_outcome(&av, y, tol).is_none() {
            gap = gap.max(meter[j].abs());
        }
    }
    Ok(gap)
}

/// `Tr[E^{M(Δt)}(Δ) ρ⊗ρ0] = Tr[E^A(Δ)ρ]` for every atom.
pub fn probability_reproducible(
    mp: &MeasuringProcess,
    a: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<bool> {
    Ok(reproducibility_gap(mp, a, rho, tol)? <= tol.eq_tol)
}

/// The conditions whose equivalence characterizes precise measurements of
/// `A` in ρ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PrecisionReport {
    pub strong_precise: bool,
    pub weak_precise: bool,
    /// `ε(A,φ) = 0` for every `φ ∈ C(A,ρ)`.
    pub eps_zero_on_cyclic: bool,
    /// Probability reproducible in every `φ ∈ C(A,ρ)`.
    pub prob_repro_on_cyclic: bool,
}

impl PrecisionReport {
    pub fn all_agree(&self) -> bool {
        let f = self.strong_precise;
        self.weak_precise == f && self.eps_zero_on_cyclic == f && self.prob_repro_on_cyclic == f
    }
}

/// Evaluates strong and weak precision in ρ, error-freeness on the cyclic
/// subspace `C(A,ρ)` (top eigenvalue of the compressed noise form), and
/// probability reproducibility on `C(A,ρ)` as the compressed identity
/// `Π_C(Π(Δ) − E^A(Δ))Π_C = 0` for every atom.
pub fn theorem2_check(
    mp: &MeasuringProcess,
    a: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<PrecisionReport> {
    check_dims(mp.system_dim(), a.dim())?;
    let joint = joint_matrix(mp, rho)?;
    let (xv, xp) = mp.system_atoms(a, tol);
    let (yv, yp) = mp.meter_atoms_after(tol);
    let strong_precise = diagonal_test(&xv, &xp, &yv, &yp, &joint, Precision::Strong, tol);
    let weak_precise = diagonal_test(&xv, &xp, &yv, &yp, &joint, Precision::Weak, tol);

    let cyclic = cyclic_subspace(a, rho, tol)?;
    let eps_zero_on_cyclic = noise_form_max_on(mp, a, &cyclic)? <= tol.eq_tol;

    let (av, ap) = spectral_atoms(a.matrix(), tol);
    let effects: Vec<CMatrix> = yp.iter().map(|q| mp.probe_average(q)).collect();
    let pc = cyclic.projector();
    let n = a.dim();
    let mut worst: f64 = 0.0;
    for (i, &x) in av.iter().enumerate() {
        let effect = find_outcome(&yv, x, tol).map_or_else(|| CMatrix::zeros(n, n), |j| effects[j].clone());
        worst = worst.max(max_abs(&(&pc * (effect - &ap[i]) * &pc)));
    }
    for (j, &y) in yv.iter().enumerate() {
        if find_outcome(&av, y, tol).is_none() {
            worst = worst.max(max_abs(&(&pc * &effects[j] * &pc)));
        }
    }
    let prob_repro_on_cyclic = worst <= tol.eq_tol;

    Ok(PrecisionReport { strong_precise, weak_precise, eps_zero_on_cyclic, prob_repro_on_cyclic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edr::rms_error;
    use crate::instrument::{dilate, luders_instrument};
    use crate::operator::{c, lift_first, lift_second, CVector, ComplexOperator, ONE, ZERO};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn plus() -> DensityOperator {
        DensityOperator::pure(&CVector::from_column_slice(&[ONE, ONE])).unwrap()
    }

    fn cnot() -> MeasuringProcess {
        let u = ComplexOperator::from_real_rows(4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.])
            .unwrap();
        MeasuringProcess::new(DensityOperator::basis(2, 0).unwrap(), u, HermitianObservable::pauli_z(), &tol()).unwrap()
    }

    fn idle(meter: HermitianObservable, probe: DensityOperator) -> MeasuringProcess {
        let n = 2 * probe.dim();
        MeasuringProcess::new(probe, ComplexOperator::identity(n), meter, &tol()).unwrap()
    }

    /// Probe prepared in a copy of ρ with the meter equal to A: `A(0)` and
    /// `M(Δt)` are independent and identically distributed.
    fn independent_meter(a: &HermitianObservable, rho: &DensityOperator) -> MeasuringProcess {
        let n = a.dim() * rho.dim();
        MeasuringProcess::new(rho.clone(), ComplexOperator::identity(n), a.clone(), &tol()).unwrap()
    }

    fn zz() -> (HermitianObservable, HermitianObservable) {
        let z = HermitianObservable::pauli_z();
        (
            HermitianObservable::from_hermitian_part(&lift_first(z.matrix(), 2)),
            HermitianObservable::from_hermitian_part(&lift_second(2, z.matrix())),
        )
    }

    #[test]
    fn commute_in_state_examples() {
        let x = HermitianObservable::pauli_x();
        let z = HermitianObservable::pauli_z();
        let mixed = DensityOperator::maximally_mixed(2);
        assert!(commute_in_state(&x, &x, &mixed, &tol()).unwrap());
        let (z1, z2) = zz();
        assert!(commute_in_state(&z1, &z2, &DensityOperator::maximally_mixed(4), &tol()).unwrap());
        assert!(!commute_in_state(&z, &x, &mixed, &tol()).unwrap());
        // σz and σx do commute in an eigenstate-free sense only when ρ kills the commutator; never for qubits.
        assert!(!commute_in_state(&z, &x, &DensityOperator::basis(2, 0).unwrap(), &tol()).unwrap());
    }

    #[test]
    fn joint_distribution_examples() {
        let (z1, z2) = zz();
        let jd = joint_distribution(&z1, &z2, &DensityOperator::basis(4, 0).unwrap(), &tol()).unwrap();
        assert_eq!(jd.x_atoms, [-1.0, 1.0]);
        assert!((jd.weights[1][1] - 1.0).abs() < 1e-15);
        assert!(jd.weights[0][0].abs() + jd.weights[0][1].abs() + jd.weights[1][0].abs() < 1e-15);

        let bell = DensityOperator::pure(&CVector::from_column_slice(&[ONE, ZERO, ZERO, ONE])).unwrap();
        let jd = joint_distribution(&z1, &z2, &bell, &tol()).unwrap();
        assert!((jd.weights[0][0] - 0.5).abs() < 1e-15 && (jd.weights[1][1] - 0.5).abs() < 1e-15);
        assert!(jd.concentrated_on_diagonal(&tol()));

        let z = HermitianObservable::pauli_z();
        let jd = joint_distribution(&z, &z, &DensityOperator::maximally_mixed(2), &tol()).unwrap();
        assert!((jd.weights[0][0] - 0.5).abs() < 1e-15 && jd.weights[0][1].abs() < 1e-15);
        assert_eq!(jd.marginal_x(), jd.marginal_y());

        let err = joint_distribution(&z, &HermitianObservable::pauli_x(), &plus(), &tol());
        assert!(matches!(err, Err(Error::NotCommuting { .. })));
    }

    #[test]
    fn joint_distribution_second_moments() {
        let (z1, z2) = zz();
        let rho = DensityOperator::new(ComplexOperator::diagonal(&[0.1, 0.2, 0.3, 0.4]), &tol()).unwrap();
        let jd = joint_distribution(&z1, &z2, &rho, &tol()).unwrap();
        // ⟨(Y − X)²⟩ computed on operators and on atoms.
        let diff = z2.matrix() - z1.matrix();
        let direct = trace_product(&(&diff * &diff), rho.matrix()).re;
        assert!((gauss_rms(&jd).powi(2) - direct).abs() < 1e-14);
        let xy = trace_product(&(z1.matrix() * z2.matrix()), rho.matrix()).re;
        let from_atoms: f64 = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| jd.weights[i][j] * jd.x_atoms[i] * jd.y_atoms[j])
            .sum();
        assert!((xy - from_atoms).abs() < 1e-14);
    }

    #[test]
    fn gauss_rms_examples() {
        let diag = JointDistribution {
            x_atoms: vec![0.0, 1.0],
            y_atoms: vec![0.0, 1.0],
            weights: vec![vec![0.3, 0.0], vec![0.0, 0.7]],
        };
        assert_eq!(gauss_rms(&diag), 0.0);
        let two = JointDistribution { x_atoms: vec![0.0], y_atoms: vec![-1.0, 1.0], weights: vec![vec![0.5, 0.5]] };
        assert!((gauss_rms(&two) - 1.0).abs() < 1e-15);
        // Independent identical ±1 atoms with σ = 1.
        let ind =
            JointDistribution { x_atoms: vec![-1.0, 1.0], y_atoms: vec![-1.0, 1.0], weights: vec![vec![0.25; 2]; 2] };
        assert!((gauss_rms(&ind) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weak_distribution_examples() {
        let z = HermitianObservable::pauli_z();
        let mp = idle(z.clone(), DensityOperator::basis(2, 0).unwrap());
        let w = weak_joint_distribution(&mp, &z, &DensityOperator::basis(2, 0).unwrap(), &tol()).unwrap();
        assert!((w.weight_at(1.0, 1.0, 1e-9) - ONE).norm() < 1e-15);
        assert!((w.total() - ONE).norm() < 1e-15);

        // The meter always reads +1, so the system's −1 branch sits off the diagonal.
        let w = weak_joint_distribution(&mp, &z, &plus(), &tol()).unwrap();
        assert!((w.weight_at(-1.0, 1.0, 1e-9) - c(0.5)).norm() < 1e-15);
        assert!((w.weight_at(1.0, 1.0, 1e-9) - c(0.5)).norm() < 1e-15);
        assert!(w.weight_at(1.0, -1.0, 1e-9).norm() < 1e-15);
        assert!(!w.concentrated_on_diagonal(&tol()));

        // With the probe in |+⟩ the meter is independent and uniform.
        let mp = idle(z.clone(), plus());
        let w = weak_joint_distribution(&mp, &z, &plus(), &tol()).unwrap();
        assert!((w.weight_at(-1.0, 1.0, 1e-9) - c(0.25)).norm() < 1e-15);
        assert!((w.weight_at(1.0, -1.0, 1e-9) - c(0.25)).norm() < 1e-15);

        let precise = dilate(&luders_instrument(&z, &tol()).unwrap(), &tol()).unwrap();
        let w = weak_joint_distribution(&precise, &z, &plus(), &tol()).unwrap();
        assert!(w.off_diagonal_max(1e-9) < 1e-14);
    }

    #[test]
    fn precision_examples() {
        let z = HermitianObservable::pauli_z();
        let precise = dilate(&luders_instrument(&z, &tol()).unwrap(), &tol()).unwrap();
        for rho in [plus(), DensityOperator::maximally_mixed(2)] {
            assert!(is_precise(&precise, &z, &rho, Precision::Strong, &tol()).unwrap());
            assert!(is_precise(&precise, &z, &rho, Precision::Weak, &tol()).unwrap());
        }
        let ind = independent_meter(&z, &plus());
        assert!(!is_precise(&ind, &z, &plus(), Precision::Strong, &tol()).unwrap());
        assert!(!is_precise(&ind, &z, &plus(), Precision::Weak, &tol()).unwrap());

        // Probability-reproducible process on an eigenstate of A.
        let one = DensityOperator::basis(2, 1).unwrap();
        let ind = independent_meter(&z, &one);
        assert!(probability_reproducible(&ind, &z, &one, &tol()).unwrap());
        assert!(is_precise(&ind, &z, &one, Precision::Strong, &tol()).unwrap());
        assert!(is_precise(&ind, &z, &one, Precision::Weak, &tol()).unwrap());
    }

    #[test]
    fn nondisturbance_examples() {
        let mp = idle(HermitianObservable::pauli_z(), plus());
        for b in [HermitianObservable::pauli_x(), HermitianObservable::pauli_y()] {
            assert!(is_nondisturbing(&mp, &b, &plus(), &tol()).unwrap());
        }
        assert!(is_nondisturbing(&cnot(), &HermitianObservable::pauli_z(), &plus(), &tol()).unwrap());
        assert!(!is_nondisturbing(&cnot(), &HermitianObservable::pauli_x(), &plus(), &tol()).unwrap());
        let jd = disturbance_joint_distribution(&cnot(), &HermitianObservable::pauli_x(), &plus(), &tol()).unwrap();
        assert!((jd.weights[1][0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn reproducibility_examples() {
        let z = HermitianObservable::pauli_z();
        let precise = dilate(&luders_instrument(&z, &tol()).unwrap(), &tol()).unwrap();
        assert!(probability_reproducible(&precise, &z, &plus(), &tol()).unwrap());
        let ind = independent_meter(&z, &plus());
        assert!(probability_reproducible(&ind, &z, &plus(), &tol()).unwrap());
        let shifted = MeasuringProcess::new(
            precise.probe_state().clone(),
            precise.unitary().clone(),
            precise.meter().shifted(0.5),
            &tol(),
        )
        .unwrap();
        assert!(!probability_reproducible(&shifted, &z, &plus(), &tol()).unwrap());
    }

    #[test]
    fn precision_characterization_examples() {
        let z = HermitianObservable::pauli_z();
        let precise = dilate(&luders_instrument(&z, &tol()).unwrap(), &tol()).unwrap();
        let r = theorem2_check(&precise, &z, &plus(), &tol()).unwrap();
        assert!(r.strong_precise && r.all_agree());

        let ind = independent_meter(&z, &plus());
        let r = theorem2_check(&ind, &z, &plus(), &tol()).unwrap();
        assert!(!r.strong_precise && r.all_agree());
        assert!(probability_reproducible(&ind, &z, &plus(), &tol()).unwrap());

        let mismatched = idle(HermitianObservable::diagonal(&[3.0, 5.0]), plus());
        let r = theorem2_check(&mismatched, &z, &plus(), &tol()).unwrap();
        assert!(!r.strong_precise && r.all_agree());
    }

    #[test]
    fn commuting_case_error_matches_gauss() {
        let z = HermitianObservable::pauli_z();
        let ind = independent_meter(&z, &plus());
        assert!(meter_commutes_in_state(&ind, &z, &plus(), &tol()).unwrap());
        let jd = measurement_joint_distribution(&ind, &z, &plus(), &tol()).unwrap();
        let eps = rms_error(&ind, &z, &plus()).unwrap();
        assert!((gauss_rms(&jd) - eps).abs() < 1e-14);
        assert!((eps - 2f64.sqrt()).abs() < 1e-14);
    }
}
