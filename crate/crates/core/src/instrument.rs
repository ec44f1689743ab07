//! Measuring processes, completely positive instruments and POVMs.
//!
//! Outcome spaces are finite sets of real labels. Instruments are stored in
//! Kraus form; equality of instruments is always decided on per-outcome
//! Choi matrices, since Kraus families are only defined up to a gauge.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::constants::Tolerances;
use crate::error::{Error, Result};
use crate::operator::{
    c, check_dims, hermitian_part, lift_first, lift_second, max_abs, partial_trace_matrix, trace_product, CMatrix,
    CVector, ComplexOperator, DensityOperator, HermitianObservable, Keep, ONE,
};
use crate::spectral::{hermitian_eigen, spectral_atoms, spectral_decompose};
#[allow(unused_imports)]
use num_traits::Float;

fn check_distinct(outcomes: &[f64], tol: &Tolerances) -> Result<()> {
    for (i, &a) in outcomes.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::InvalidParameter(format!("outcome label {a} is not finite")));
        }
        if outcomes[..i].iter().any(|&b| (a - b).abs() <= tol.eq_tol) {
            return Err(Error::DuplicateOutcome(a));
        }
    }
    Ok(())
}

pub(crate) fn find_outcome(outcomes: &[f64], value: f64, tol: &Tolerances) -> Option<usize> {
    outcomes.iter().position(|&o| (o - value).abs() <= tol.eq_tol)
}

/// A measuring process `(K, ρ0, U, M)`: probe space, probe state,
/// interaction unitary on `H ⊗ K` and meter observable on `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuringProcess {
    system_dim: usize,
    probe_state: DensityOperator,
    unitary: ComplexOperator,
    meter: HermitianObservable,
}

impl MeasuringProcess {
    pub fn new(
        probe_state: DensityOperator,
        unitary: ComplexOperator,
        meter: HermitianObservable,
        tol: &Tolerances,
    ) -> Result<Self> {
        let probe_dim = probe_state.dim();
        check_dims(probe_dim, meter.dim())?;
        if !unitary.dim().is_multiple_of(probe_dim) {
            return Err(Error::DimensionMismatch { expected: probe_dim, found: unitary.dim() });
        }
        let deviation = unitary.unitarity_defect();
        if deviation > tol.eq_tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { system_dim: unitary.dim() / probe_dim, probe_state, unitary, meter })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_state.dim()
    }

    pub fn probe_state(&self) -> &DensityOperator {
        &self.probe_state
    }

    pub fn unitary(&self) -> &ComplexOperator {
        &self.unitary
    }

    pub fn meter(&self) -> &HermitianObservable {
        &self.meter
    }

    pub(crate) fn dims(&self) -> (usize, usize) {
        (self.system_dim, self.probe_dim())
    }

    /// Heisenberg-picture evolution `X(Δt) = U† X U` of a composite operator.
    pub(crate) fn evolve(&self, x: &CMatrix) -> CMatrix {
        let u = self.unitary.matrix();
        u.adjoint() * x * u
    }

    /// `ρ ⊗ ρ0`
    pub fn joint_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        check_dims(self.system_dim, rho.dim())?;
        Ok(rho.product(&self.probe_state))
    }

    /// `A(0) = A ⊗ 1`
    pub fn system_observable(&self, a: &HermitianObservable) -> Result<HermitianObservable> {
        check_dims(self.system_dim, a.dim())?;
        Ok(HermitianObservable::from_hermitian_part(&lift_first(a.matrix(), self.probe_dim())))
    }

    /// `M(Δt) = U†(1 ⊗ M)U`
    pub fn meter_after(&self) -> HermitianObservable {
        HermitianObservable::from_hermitian_part(&self.evolve(&lift_second(self.system_dim, self.meter.matrix())))
    }

    /// `B(Δt) = U†(B ⊗ 1)U`
    pub fn system_observable_after(&self, b: &HermitianObservable) -> Result<HermitianObservable> {
        check_dims(self.system_dim, b.dim())?;
        Ok(HermitianObservable::from_hermitian_part(&self.evolve(&lift_first(b.matrix(), self.probe_dim()))))
    }

    /// Atoms of the meter's spectral measure on `K`.
    pub(crate) fn meter_atoms(&self, tol: &Tolerances) -> (Vec<f64>, Vec<CMatrix>) {
        spectral_atoms(self.meter.matrix(), tol)
    }

    /// Atoms of `E^{M(Δt)}`, obtained by conjugating the meter's own
    /// projectors rather than re-diagonalizing `M(Δt)`.
    pub(crate) fn meter_atoms_after(&self, tol: &Tolerances) -> (Vec<f64>, Vec<CMatrix>) {
        let (vals, projs) = self.meter_atoms(tol);
        let lifted = projs.iter().map(|p| self.evolve(&lift_second(self.system_dim, p))).collect();
        (vals, lifted)
    }

    /// Atoms of `E^{B(Δt)}` by conjugation of `E^B ⊗ 1`.
    pub(crate) fn system_atoms_after(&self, b: &HermitianObservable, tol: &Tolerances) -> (Vec<f64>, Vec<CMatrix>) {
        let (vals, projs) = spectral_atoms(b.matrix(), tol);
        let lifted = projs.iter().map(|p| self.evolve(&lift_first(p, self.probe_dim()))).collect();
        (vals, lifted)
    }

    /// Atoms of `E^{A(0)} = E^A ⊗ 1`.
    pub(crate) fn system_atoms(&self, a: &HermitianObservable, tol: &Tolerances) -> (Vec<f64>, Vec<CMatrix>) {
        let (vals, projs) = spectral_atoms(a.matrix(), tol);
        let lifted = projs.iter().map(|p| lift_first(p, self.probe_dim())).collect();
        (vals, lifted)
    }

    /// `Tr_K[X (1 ⊗ ρ0)]` for an operator on `H ⊗ K`.
    pub(crate) fn probe_average(&self, x: &CMatrix) -> CMatrix {
        let weighted = x * lift_second(self.system_dim, self.probe_state.matrix());
        partial_trace_matrix(&weighted, self.dims(), Keep::First).expect("dimensions fixed at construction")
    }
}

/// A finite-outcome CP instrument in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct CPInstrument {
    dim: usize,
    outcomes: Vec<f64>,
    kraus: Vec<Vec<ComplexOperator>>,
}

impl CPInstrument {
    /// Validates labels, dimensions and `Σ K†K = 1`. An outcome may carry an
    /// empty Kraus list (the zero map).
    pub fn new(dim: usize, outcomes: Vec<f64>, kraus: Vec<Vec<ComplexOperator>>, tol: &Tolerances) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidParameter("an instrument needs at least one outcome".into()));
        }
        check_dims(outcomes.len(), kraus.len())?;
        check_distinct(&outcomes, tol)?;
        let mut total = CMatrix::zeros(dim, dim);
        for k in kraus.iter().flatten() {
            check_dims(dim, k.dim())?;
            total += k.matrix().adjoint() * k.matrix();
        }
        let deviation = max_abs(&(total - CMatrix::identity(dim, dim)));
        if deviation > tol.eq_tol {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self { dim, outcomes, kraus })
    }

    /// Builds an instrument from per-outcome Choi matrices
    /// `C = Σᵢⱼ |i⟩⟨j| ⊗ ℐ(|i⟩⟨j|)` by eigendecomposition; eigenvalues at or
    /// below `eq_tol` are discarded, negative ones beyond `psd_tol` reject
    /// the map as not completely positive.
    pub fn from_choi(dim: usize, outcomes: Vec<f64>, chois: &[CMatrix], tol: &Tolerances) -> Result<Self> {
        check_dims(outcomes.len(), chois.len())?;
        let mut kraus = Vec::with_capacity(chois.len());
        for (&outcome, choi) in outcomes.iter().zip(chois) {
            check_dims(dim * dim, choi.nrows())?;
            let deviation = max_abs(&(choi - choi.adjoint()));
            if deviation > tol.eq_tol {
                return Err(Error::NotHermitian { deviation });
            }
            kraus.push(kraus_from_choi(dim, choi, outcome, tol)?);
        }
        Self::new(dim, outcomes, kraus, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn kraus(&self) -> &[Vec<ComplexOperator>] {
        &self.kraus
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus.iter().map(Vec::len).sum()
    }

    /// `ℐ(m)ρ = Σⱼ K_{m,j} ρ K_{m,j}†` for outcome index `m`.
    pub fn apply(&self, index: usize, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus[index] {
            out += k.matrix() * rho * k.matrix().adjoint();
        }
        out
    }

    /// Choi matrix of the map for outcome index `m`.
    pub fn choi(&self, index: usize) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d * d, d * d);
        for k in &self.kraus[index] {
            let v = vectorize(k.matrix());
            out += &v * v.adjoint();
        }
        out
    }

    /// Smallest Choi eigenvalue over all outcomes; non-negative (up to
    /// rounding) exactly when every outcome map is completely positive.
    pub fn min_choi_eigenvalue(&self) -> f64 {
        (0..self.outcomes.len()).map(|m| hermitian_eigen(&self.choi(m)).0[0]).fold(f64::INFINITY, f64::min)
    }
}

/// `vec(K)[i·d_out + a] = K[a, i]`, matching the Choi layout above.
fn vectorize(k: &CMatrix) -> CVector {
    let (d_out, d_in) = k.shape();
    CVector::from_fn(d_in * d_out, |idx, _| k[(idx % d_out, idx / d_out)])
}

fn kraus_from_choi(dim: usize, choi: &CMatrix, outcome: f64, tol: &Tolerances) -> Result<Vec<ComplexOperator>> {
    let (vals, vecs) = hermitian_eigen(choi);
    if vals.first().is_some_and(|&v| v < tol.psd_tol) {
        return Err(Error::NotCompletelyPositive { outcome, eigenvalue: vals[0] });
    }
    let mut out = Vec::new();
    // Largest eigenvalue first so the dominant Kraus operator leads.
    for (k, &v) in vals.iter().enumerate().rev() {
        if v <= tol.eq_tol {
            continue;
        }
        let scale = v.sqrt();
        let col = vecs.column(k);
        let m = CMatrix::from_fn(dim, dim, |a, i| col[i * dim + a] * c(scale));
        out.push(ComplexOperator::from_matrix_unchecked(m));
    }
    Ok(out)
}

/// Largest Choi-matrix difference between two instruments, with outcomes
/// matched by label within `eq_tol`; unmatched outcomes are compared
/// against the zero map.
pub fn choi_distance(a: &CPInstrument, b: &CPInstrument, tol: &Tolerances) -> Result<f64> {
    check_dims(a.dim, b.dim)?;
    let mut worst: f64 = 0.0;
    for (m, &label) in a.outcomes.iter().enumerate() {
        let ca = a.choi(m);
        let d = match find_outcome(&b.outcomes, label, tol) {
            Some(n) => max_abs(&(ca - b.choi(n))),
            None => max_abs(&ca),
        };
        worst = worst.max(d);
    }
    for (n, &label) in b.outcomes.iter().enumerate() {
        if find_outcome(&a.outcomes, label, tol).is_none() {
            worst = worst.max(max_abs(&b.choi(n)));
        }
    }
    Ok(worst)
}

/// A finite POVM: positive effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct POVM {
    outcomes: Vec<f64>,
    effects: Vec<ComplexOperator>,
}

impl POVM {
    pub fn new(outcomes: Vec<f64>, effects: Vec<ComplexOperator>, tol: &Tolerances) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidParameter("a POVM needs at least one outcome".into()));
        }
        check_dims(outcomes.len(), effects.len())?;
        check_distinct(&outcomes, tol)?;
        let dim = effects[0].dim();
        let mut total = CMatrix::zeros(dim, dim);
        for (&o, e) in outcomes.iter().zip(&effects) {
            check_dims(dim, e.dim())?;
            let deviation = e.hermiticity_defect();
            if deviation > tol.eq_tol {
                return Err(Error::NotHermitian { deviation });
            }
            let min = hermitian_eigen(e.matrix()).0[0];
            if min < tol.psd_tol {
                return Err(Error::NotPositive { outcome: o, eigenvalue: min });
            }
            total += e.matrix();
        }
        let deviation = max_abs(&(total - CMatrix::identity(dim, dim)));
        if deviation > tol.eq_tol {
            return Err(Error::InvalidParameter(format!("effects do not sum to identity (deviation {deviation:e})")));
        }
        let effects =
            effects.iter().map(|e| ComplexOperator::from_matrix_unchecked(hermitian_part(e.matrix()))).collect();
        Ok(Self { outcomes, effects })
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[ComplexOperator] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// `Tr[Π(m)ρ]` for every outcome.
    pub fn probabilities(&self, rho: &DensityOperator, tol: &Tolerances) -> Result<OutcomeDistribution> {
        check_dims(self.dim(), rho.dim())?;
        let probs = self.effects.iter().map(|e| trace_product(e.matrix(), rho.matrix()).re).collect();
        OutcomeDistribution::new(self.outcomes.clone(), probs, tol)
    }
}

/// Probabilities attached to finitely many real outcomes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OutcomeDistribution {
    outcomes: Vec<f64>,
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(outcomes: Vec<f64>, probabilities: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        check_dims(outcomes.len(), probabilities.len())?;
        if let Some(&p) = probabilities.iter().find(|&&p| p.is_nan() || p < tol.psd_tol) {
            return Err(Error::InvalidDistribution(format!("probability {p} below {}", tol.psd_tol)));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > tol.eq_tol {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { outcomes, probabilities })
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.outcomes.iter().copied().zip(self.probabilities.iter().copied())
    }

    /// Probability of the atom at `value`; zero when no outcome is within `tol`.
    pub fn probability_of(&self, value: f64, tol: f64) -> f64 {
        self.iter().filter(|(o, _)| (o - value).abs() <= tol).map(|(_, p)| p).sum()
    }

    /// Largest atomwise probability gap, matching outcome values within `tol`.
    pub fn max_gap(&self, other: &OutcomeDistribution, tol: f64) -> f64 {
        let mine = self.iter().map(|(o, p)| (p - other.probability_of(o, tol)).abs());
        let theirs =
            other.iter().filter(|(o, _)| !self.outcomes.iter().any(|x| (x - o).abs() <= tol)).map(|(_, p)| p.abs());
        mine.chain(theirs).fold(0.0, f64::max)
    }
}

/// Born statistics `p(λᵢ) = Tr[Pᵢρ]` over the spectrum of `a`.
pub fn born_distribution(
    a: &HermitianObservable,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<OutcomeDistribution> {
    check_dims(a.dim(), rho.dim())?;
    let sd = spectral_decompose(a, tol);
    let probs = sd.projectors().iter().map(|p| trace_product(p.matrix(), rho.matrix()).re).collect();
    OutcomeDistribution::new(sd.eigenvalues().to_vec(), probs, tol)
}

/// The instrument `ℐ(m)ρ = Tr_K[(1 ⊗ E^M(m)) U(ρ ⊗ ρ0)U†]` realized by a
/// measuring process, one outcome per meter eigenvalue, with Kraus
/// operators extracted from each outcome's Choi matrix.
pub fn instrument_from_process(mp: &MeasuringProcess, tol: &Tolerances) -> Result<CPInstrument> {
    let (d, k) = mp.dims();
    let u = mp.unitary().matrix();
    let (labels, projs) = mp.meter_atoms(tol);
    let rho0 = mp.probe_state().matrix();
    let mut chois = vec![CMatrix::zeros(d * d, d * d); labels.len()];
    for i in 0..d {
        for j in 0..d {
            let mut unit = CMatrix::zeros(d, d);
            unit[(i, j)] = ONE;
            let evolved = u * unit.kronecker(rho0) * u.adjoint();
            for (choi, p) in chois.iter_mut().zip(&projs) {
                let out = partial_trace_matrix(&(lift_second(d, p) * &evolved), (d, k), Keep::First)?;
                for a in 0..d {
                    for b in 0..d {
                        choi[(i * d + a, j * d + b)] = out[(a, b)];
                    }
                }
            }
        }
    }
    for choi in &mut chois {
        *choi = hermitian_part(choi);
    }
    CPInstrument::from_choi(d, labels, &chois, tol)
}

/// The POVM `Π(m) = ℐ(m)*1 = Σⱼ K_{m,j}†K_{m,j}`.
pub fn povm_of(instrument: &CPInstrument, tol: &Tolerances) -> Result<POVM> {
    let d = instrument.dim;
    let effects = instrument
        .kraus
        .iter()
        .map(|ks| {
            let mut e = CMatrix::zeros(d, d);
            for k in ks {
                e += k.matrix().adjoint() * k.matrix();
            }
            ComplexOperator::from_matrix_unchecked(e)
        })
        .collect();
    POVM::new(instrument.outcomes.clone(), effects, tol)
}

/// POVM `Π(m) = Tr_K[E^{M(Δt)}(m)(1 ⊗ ρ0)]` of a measuring process.
pub fn povm_of_process(mp: &MeasuringProcess, tol: &Tolerances) -> Result<POVM> {
    let (labels, projs) = mp.meter_atoms_after(tol);
    let effects =
        projs.iter().map(|p| ComplexOperator::from_matrix_unchecked(hermitian_part(&mp.probe_average(p)))).collect();
    POVM::new(labels, effects, tol)
}

/// Outcome statistics `Tr[ℐ(m)ρ]`.
pub fn outcome_probabilities(
    instrument: &CPInstrument,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<OutcomeDistribution> {
    check_dims(instrument.dim, rho.dim())?;
    let probs = (0..instrument.outcomes.len()).map(|m| instrument.apply(m, rho.matrix()).trace().re).collect();
    OutcomeDistribution::new(instrument.outcomes.clone(), probs, tol)
}

/// Post-selected state after conditioning on an outcome set.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned {
    pub probability: f64,
    pub state: DensityOperator,
}

/// `ρ_Δ = ℐ(Δ)ρ / Tr[ℐ(Δ)ρ]`; every label in `event` must be an outcome of
/// the instrument.
pub fn post_state(
    instrument: &CPInstrument,
    event: &[f64],
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<Conditioned> {
    check_dims(instrument.dim, rho.dim())?;
    let mut indices = Vec::with_capacity(event.len());
    for &label in event {
        let m = find_outcome(&instrument.outcomes, label, tol).ok_or(Error::UnknownOutcome(label))?;
        if !indices.contains(&m) {
            indices.push(m);
        }
    }
    let d = instrument.dim;
    let mut acc = CMatrix::zeros(d, d);
    for &m in &indices {
        acc += instrument.apply(m, rho.matrix());
    }
    let probability = acc.trace().re;
    if probability.is_nan() || probability <= tol.eq_tol {
        return Err(Error::ZeroProbability { probability });
    }
    Ok(Conditioned { probability, state: DensityOperator::from_unnormalized(&acc)? })
}

/// Pure measuring process realizing `instrument`.
///
/// The probe has one basis slot per Kraus operator, grouped in contiguous
/// blocks per outcome (an outcome with no Kraus operators still gets one
/// slot). The probe starts in `|0⟩`, the meter reads `outcome(m)` on block
/// `m`, and `U` completes the isometry `ψ ⊗ e0 ↦ Σ K_{m,j}ψ ⊗ |m,j⟩`.
pub fn dilate(instrument: &CPInstrument, tol: &Tolerances) -> Result<MeasuringProcess> {
    let d = instrument.dim;
    let mut total = CMatrix::zeros(d, d);
    for k in instrument.kraus.iter().flatten() {
        total += k.matrix().adjoint() * k.matrix();
    }
    let deviation = max_abs(&(total - CMatrix::identity(d, d)));
    if deviation > tol.eq_tol {
        return Err(Error::NotTracePreserving { deviation });
    }

    let slots: Vec<usize> = instrument.kraus.iter().map(|ks| ks.len().max(1)).collect();
    let k: usize = slots.iter().sum();
    let n = d * k;

    let mut meter_diag = Vec::with_capacity(k);
    let mut columns: Vec<CVector> = Vec::with_capacity(n);
    for i in 0..d {
        let mut col = CVector::zeros(n);
        let mut slot = 0;
        for (ks, &width) in instrument.kraus.iter().zip(&slots) {
            for (j, kr) in ks.iter().enumerate() {
                for a in 0..d {
                    col[a * k + slot + j] = kr.matrix()[(a, i)];
                }
            }
            slot += width;
        }
        columns.push(col);
    }
    for (&label, &width) in instrument.outcomes.iter().zip(&slots) {
        meter_diag.extend(core::iter::repeat_n(label, width));
    }

    let completion = complete_orthonormal(&columns, n);
    let mut u = CMatrix::zeros(n, n);
    let mut extra = completion.into_iter();
    for col_index in 0..n {
        let col = if col_index % k == 0 {
            columns[col_index / k].clone()
        } else {
            extra.next().expect("completion supplies n - d vectors")
        };
        u.set_column(col_index, &col);
    }

    let unitary = ComplexOperator::from_matrix_unchecked(u);
    let meter = HermitianObservable::diagonal(&meter_diag);
    let probe = DensityOperator::basis(k, 0)?;
    MeasuringProcess::new(probe, unitary, meter, tol)
}

/// Extends an orthonormal family to a basis of `C^n` by Gram–Schmidt over
/// canonical basis vectors. Each step takes the candidate with the largest
/// component orthogonal to the current span, lowest index on ties.
fn complete_orthonormal(given: &[CVector], n: usize) -> Vec<CVector> {
    let mut basis: Vec<CVector> = given.to_vec();
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n.saturating_sub(given.len()));
    while basis.len() < n {
        let mut best = (usize::MAX, -1.0);
        for (idx, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let overlap: f64 = basis.iter().map(|q| q[idx].norm_sqr()).sum();
            let residual = 1.0 - overlap;
            if residual > best.1 {
                best = (idx, residual);
            }
        }
        let idx = best.0;
        used[idx] = true;
        let mut v = CVector::zeros(n);
        v[idx] = ONE;
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        let v = v / c(norm);
        basis.push(v.clone());
        out.push(v);
    }
    out
}

/// Projective (Lüders) instrument of `a`: one Kraus operator per
/// eigenvalue, the spectral projector.
pub fn luders_instrument(a: &HermitianObservable, tol: &Tolerances) -> Result<CPInstrument> {
    let sd = spectral_decompose(a, tol);
    let kraus = sd.projectors().iter().map(|p| vec![p.clone()]).collect();
    CPInstrument::new(a.dim(), sd.eigenvalues().to_vec(), kraus, tol)
}

/// Per-outcome entry of a [`RepeatabilityReport`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OutcomeResidual {
    pub outcome: f64,
    pub probability: f64,
    /// `(Tr[(A − a)ρ_a(A − a)†])^{1/2}`
    pub residual: f64,
    /// `σ(A, ρ_a)`
    pub post_std_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RepeatabilityReport {
    pub repeatable: bool,
    pub worst_residual: f64,
    /// Every post-state satisfies `σ(A, ρ_a) ≤ r(a)`.
    pub std_dev_bounded: bool,
    pub per_outcome: Vec<OutcomeResidual>,
}

/// Checks whether each outcome `a` (with probability above `eq_tol`) leaves
/// the system in an `epsilon`-approximate eigenstate of `a` belonging to
/// the outcome label.
pub fn check_repeatability(
    instrument: &CPInstrument,
    a: &HermitianObservable,
    rho: &DensityOperator,
    epsilon: f64,
    tol: &Tolerances,
) -> Result<RepeatabilityReport> {
    check_dims(instrument.dim, a.dim())?;
    check_dims(instrument.dim, rho.dim())?;
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let mut per_outcome = Vec::new();
    for (m, &label) in instrument.outcomes.iter().enumerate() {
        let unnorm = instrument.apply(m, rho.matrix());
        let probability = unnorm.trace().re;
        if probability <= tol.eq_tol {
            continue;
        }
        let post = hermitian_part(&unnorm) * c(1.0 / probability);
        let residual = crate::operator::shifted_second_moment(a.matrix(), label, &post).sqrt();
        let post_std_dev = crate::operator::variance_of(a.matrix(), &post).sqrt();
        per_outcome.push(OutcomeResidual { outcome: label, probability, residual, post_std_dev });
    }
    let worst_residual = per_outcome.iter().map(|o| o.residual).fold(0.0, f64::max);
    let std_dev_bounded = per_outcome.iter().all(|o| o.post_std_dev <= o.residual + 1e-8);
    Ok(RepeatabilityReport {
        repeatable: worst_residual <= epsilon + tol.eq_tol,
        worst_residual,
        std_dev_bounded,
        per_outcome,
    })
}

/// Trivial instrument with a single outcome and the identity channel.
pub fn identity_instrument(dim: usize, label: f64) -> CPInstrument {
    CPInstrument { dim, outcomes: vec![label], kraus: vec![vec![ComplexOperator::identity(dim)]] }
}
