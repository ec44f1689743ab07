//! Seeded random instances: Haar unitaries, states, observables, measuring
//! processes, CP instruments and Gaussian states.
//!
//! Every trial of a sweep draws from its own ChaCha stream selected by the
//! trial index, so results do not depend on execution order.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::constants::{PhysicalConstants, Tolerances};
use crate::error::Result;
use crate::gaussian::GaussianState;
use crate::instrument::{dilate, CPInstrument, MeasuringProcess};
use crate::operator::{
    c, hermitian_part, outer, CMatrix, CVector, ComplexOperator, DensityOperator, HermitianObservable, C64,
};
use crate::spectral::hermitian_function;

/// Independent generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexOperator {
    let qr = ginibre(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexOperator::from_matrix_unchecked(q)
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| complex_normal(rng));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / c(norm);
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityOperator {
    let v = random_unit_vector(rng, n);
    DensityOperator::from_matrix_unchecked(outer(&v, &v))
}

/// Uniform point of the probability simplex with `n` vertices.
fn simplex_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Mixed state with simplex-uniform eigenvalues in a Haar-random basis.
pub fn random_mixed_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityOperator {
    let p = simplex_point(rng, n);
    state_with_spectrum(rng, &p)
}

fn state_with_spectrum<R: Rng + ?Sized>(rng: &mut R, p: &[f64]) -> DensityOperator {
    let u = random_unitary(rng, p.len());
    let d = ComplexOperator::diagonal(p);
    let m = u.matrix() * d.matrix() * u.matrix().adjoint();
    DensityOperator::from_matrix_unchecked(hermitian_part(&m))
}

/// Pure or mixed with equal odds.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityOperator {
    if rng.random_bool(0.5) {
        random_pure_state(rng, n)
    } else {
        random_mixed_state(rng, n)
    }
}

/// Hermitian part of a Ginibre matrix.
pub fn random_observable<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianObservable {
    HermitianObservable::from_hermitian_part(&ginibre(rng, n, n))
}

/// Observable with the given eigenvalues in a Haar-random basis.
pub fn observable_with_spectrum<R: Rng + ?Sized>(rng: &mut R, values: &[f64]) -> HermitianObservable {
    let u = random_unitary(rng, values.len());
    let d = ComplexOperator::diagonal(values);
    HermitianObservable::from_hermitian_part(&(u.matrix() * d.matrix() * u.matrix().adjoint()))
}

/// Integer eigenvalues from a small range, so that degeneracies occur.
pub fn small_integer_spectrum<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-2i32..=2) as f64).collect()
}

/// `(ρ0, U, M)` on a probe of dimension `k` with everything Haar or
/// Ginibre random.
pub fn random_process<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> MeasuringProcess {
    let probe = random_state(rng, k);
    let u = random_unitary(rng, d * k);
    let meter = random_observable(rng, k);
    process_unchecked(probe, u, meter)
}

pub(crate) fn process_unchecked(
    probe: DensityOperator,
    u: ComplexOperator,
    meter: HermitianObservable,
) -> MeasuringProcess {
    MeasuringProcess::new(probe, u, meter, &Tolerances::default()).expect("Haar unitaries are unitary to rounding")
}

/// Kraus blocks of a random isometry `G(G†G)^{-1/2}` from `C^d` into
/// `C^{d·count}`, split into `count` operators.
fn random_isometry_blocks<R: Rng + ?Sized>(rng: &mut R, d_out: usize, d_in: usize, count: usize) -> Vec<CMatrix> {
    let g = ginibre(rng, d_out * count, d_in);
    let gram = g.adjoint() * &g;
    let v = &g * hermitian_function(&gram, |x| 1.0 / x.sqrt());
    (0..count).map(|b| v.rows(b * d_out, d_out).into_owned()).collect()
}

/// Random CP instrument with the given outcome labels and `kraus_per`
/// Kraus operators per outcome.
pub fn random_cp_instrument<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    outcomes: Vec<f64>,
    kraus_per: usize,
) -> Result<CPInstrument> {
    let m = outcomes.len();
    let blocks = random_isometry_blocks(rng, d, d, m * kraus_per);
    let kraus = blocks
        .chunks(kraus_per)
        .map(|ch| ch.iter().map(|k| ComplexOperator::from_matrix_unchecked(k.clone())).collect())
        .collect();
    CPInstrument::new(d, outcomes, kraus, &Tolerances::default())
}

/// Admissible Gaussian state: `ν(ħ/2)·SSᵀ` with `S` a random squeeze and
/// rotation, `ν ≥ 1`, and normally distributed means.
pub fn random_gaussian_state<R: Rng + ?Sized>(rng: &mut R, constants: &PhysicalConstants) -> GaussianState {
    let theta = rng.random_range(0.0..core::f64::consts::PI);
    let r: f64 = (rng.random_range(-1.5f64..1.5)).exp();
    let nu = 1.0 + rng.random_range(0.0..2.0);
    let (s, cs) = theta.sin_cos();
    // S = R(θ) diag(r, 1/r)
    let s11 = cs * r;
    let s12 = -s / r;
    let s21 = s * r;
    let s22 = cs / r;
    let scale = nu * constants.kennard_bound();
    let cov = [
        [scale * (s11 * s11 + s12 * s12), scale * (s11 * s21 + s12 * s22)],
        [scale * (s11 * s21 + s12 * s22), scale * (s21 * s21 + s22 * s22)],
    ];
    let mean = [StandardNormal.sample(rng), StandardNormal.sample(rng)];
    GaussianState::new(mean, cov, constants, &Tolerances::default()).expect("congruent to a thermal covariance")
}

/// Random-instance families used for the precision characterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    /// Random probe state, interaction, meter and observable.
    Generic,
    /// Random interaction with meter outcomes drawn from the spectrum of A.
    MatchedSpectrum,
    /// Dilation of `{V_a E^A(a)}` with random unitaries `V_a`: precise in
    /// every state.
    DilatedLuders,
    /// Precise on a spectral subspace of A and random elsewhere, probed
    /// with equal odds by a state inside that subspace or one leaking out.
    PreciseOnSubspace,
}

impl Family {
    pub const ALL: [Family; 4] =
        [Family::Generic, Family::MatchedSpectrum, Family::DilatedLuders, Family::PreciseOnSubspace];

    pub fn for_trial(index: u64) -> Family {
        Family::ALL[(index % 4) as usize]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Generic => "generic",
            Family::MatchedSpectrum => "matched_spectrum",
            Family::DilatedLuders => "dilated_luders",
            Family::PreciseOnSubspace => "precise_on_subspace",
        }
    }
}

/// A measuring process together with an observable and a state.
#[derive(Debug, Clone)]
pub struct Instance {
    pub process: MeasuringProcess,
    pub a: HermitianObservable,
    pub rho: DensityOperator,
}

fn distinct_spectrum<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    // Evenly spaced levels with a random offset keep atoms well separated.
    let offset: f64 = rng.random_range(-1.0..1.0);
    (0..n).map(|i| offset + i as f64).collect()
}

pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, family: Family, d: usize) -> Result<Instance> {
    let tol = Tolerances::default();
    match family {
        Family::Generic => {
            let k = rng.random_range(2..=d.max(2));
            Ok(Instance { process: random_process(rng, d, k), a: random_observable(rng, d), rho: random_state(rng, d) })
        }
        Family::MatchedSpectrum => {
            let values = small_integer_spectrum(rng, d);
            let a = observable_with_spectrum(rng, &values);
            let k = rng.random_range(2..=d.max(2));
            let meter_values: Vec<f64> = (0..k).map(|_| values[rng.random_range(0..d)]).collect();
            let meter = observable_with_spectrum(rng, &meter_values);
            let probe = random_state(rng, k);
            let u = random_unitary(rng, d * k);
            Ok(Instance { process: process_unchecked(probe, u, meter), a, rho: random_state(rng, d) })
        }
        Family::DilatedLuders => {
            let values = small_integer_spectrum(rng, d);
            let a = observable_with_spectrum(rng, &values);
            let sd = crate::spectral::spectral_decompose(&a, &tol);
            let kraus = sd
                .projectors()
                .iter()
                .map(|p| {
                    let v = random_unitary(rng, d);
                    alloc::vec![ComplexOperator::from_matrix_unchecked(v.matrix() * p.matrix())]
                })
                .collect();
            let inst = CPInstrument::new(d, sd.eigenvalues().to_vec(), kraus, &tol)?;
            Ok(Instance { process: dilate(&inst, &tol)?, a, rho: random_state(rng, d) })
        }
        Family::PreciseOnSubspace => {
            let values = distinct_spectrum(rng, d);
            let w = random_unitary(rng, d);
            let wm = w.matrix();
            let a = HermitianObservable::from_hermitian_part(
                &(wm * ComplexOperator::diagonal(&values).matrix() * wm.adjoint()),
            );
            let s = rng.random_range(1..d.max(2));
            let inside = wm.columns(0, s).into_owned();
            let outside = wm.columns(s, d - s).into_owned();
            let blocks = random_isometry_blocks(rng, d, d - s, d);
            let mut kraus: Vec<Vec<ComplexOperator>> = Vec::with_capacity(d);
            for (i, block) in blocks.iter().enumerate() {
                let mut ops = Vec::new();
                if i < s {
                    let v = random_unitary(rng, d);
                    let w_i = inside.column(i).into_owned();
                    ops.push(ComplexOperator::from_matrix_unchecked(v.matrix() * outer(&w_i, &w_i)));
                }
                ops.push(ComplexOperator::from_matrix_unchecked(block * outside.adjoint()));
                kraus.push(ops);
            }
            let inst = CPInstrument::new(d, values, kraus, &tol)?;
            let rho = if rng.random_bool(0.5) {
                let sigma = random_state(rng, s);
                let m = &inside * sigma.matrix() * inside.adjoint();
                DensityOperator::from_matrix_unchecked(hermitian_part(&m))
            } else {
                random_state(rng, d)
            };
            Ok(Instance { process: dilate(&inst, &tol)?, a, rho })
        }
    }
}

/// Measuring process whose probe is a copy of ρ read out by `A` with no
/// interaction: `A(0)` and `M(Δt)` are independent and identically
/// distributed.
pub fn independent_meter(a: &HermitianObservable, rho: &DensityOperator) -> MeasuringProcess {
    let n = a.dim() * rho.dim();
    process_unchecked(rho.clone(), ComplexOperator::identity(n), a.clone())
}

/// Random CP instrument in the form used for dilation round trips:
/// between one and three outcomes with one to two Kraus operators each.
pub fn random_instrument_for_dilation<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<CPInstrument> {
    let m = rng.random_range(1..=3);
    let outcomes: Vec<f64> = (0..m).map(|i| i as f64 - 1.0).collect();
    let kraus_per = rng.random_range(1..=2);
    random_cp_instrument(rng, d, outcomes, kraus_per)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = trial_rng(7, 3).random();
        let b: u64 = trial_rng(7, 3).random();
        let c: u64 = trial_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = trial_rng(1, 0);
        for n in 1..=8 {
            let u = random_unitary(&mut rng, n);
            assert!(u.unitarity_defect() < 1e-13);
        }
    }

    #[test]
    fn states_are_valid() {
        let mut rng = trial_rng(2, 0);
        let tol = Tolerances::default();
        for n in 1..=6 {
            for _ in 0..5 {
                let rho = random_state(&mut rng, n);
                assert!(DensityOperator::new(rho.op().clone(), &tol).is_ok());
            }
        }
    }

    #[test]
    fn random_instruments_are_trace_preserving() {
        let mut rng = trial_rng(3, 0);
        let inst = random_cp_instrument(&mut rng, 3, alloc::vec![0.0, 1.0, 2.0], 2).unwrap();
        let mut total = CMatrix::zeros(3, 3);
        for ops in inst.kraus() {
            for k in ops {
                total += k.matrix().adjoint() * k.matrix();
            }
        }
        assert!(max_abs(&(total - CMatrix::identity(3, 3))) < 1e-13);
    }

    #[test]
    fn every_family_builds() {
        let mut rng = trial_rng(4, 0);
        for family in Family::ALL {
            for d in 2..=4 {
                let inst = random_instance(&mut rng, family, d).unwrap();
                assert_eq!(inst.process.system_dim(), d);
                assert_eq!(inst.a.dim(), d);
            }
        }
    }

    #[test]
    fn gaussian_states_are_admissible() {
        let mut rng = trial_rng(5, 0);
        let k = PhysicalConstants::default();
        for _ in 0..50 {
            let g = random_gaussian_state(&mut rng, &k);
            assert!(g.uncertainty_product() >= 0.5 - 1e-12);
        }
    }
}
