//! Randomized checks of the universally valid relations and of the
//! precision characterization, one independent seeded trial at a time.
//!
//! [`run_trial`] and [`run_identity_trial`] are pure functions of
//! `(spec, index)`; callers may evaluate them in any order or in parallel
//! and fold the records with [`Census::from_records`].

use alloc::vec::Vec;

use rand::Rng;

use crate::constants::Tolerances;
use crate::edr::{edr_ledger, locally_uniform_edr, rms_error, EDRReport, LocallyUniformEDR, INEQUALITY_SLACK};
use crate::error::{Error, Result};
use crate::jpd::{gauss_rms, measurement_joint_distribution, meter_commutes_in_state, theorem2_check, PrecisionReport};
use crate::operator::ComplexOperator;
use crate::random::{random_instance, random_observable, random_state, trial_rng, Family};

/// Largest system dimension a sweep may request.
pub const MAX_SWEEP_DIM: usize = 8;

/// Threshold below which `ε` or `η` counts as zero for the corollaries.
pub const VANISHING: f64 = 1e-10;

/// Stream offset separating the identity-interaction trials from the main
/// ones.
const IDENTITY_STREAM: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepSpec {
    pub min_dim: usize,
    pub max_dim: usize,
    pub trials: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn new(min_dim: usize, max_dim: usize, trials: usize, seed: u64) -> Result<Self> {
        if min_dim < 2 || min_dim > max_dim || max_dim > MAX_SWEEP_DIM {
            return Err(Error::InvalidParameter(alloc::format!(
                "dimension range {min_dim}..{max_dim} must satisfy 2 ≤ min ≤ max ≤ {MAX_SWEEP_DIM}"
            )));
        }
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(Self { min_dim, max_dim, trials, seed })
    }

    /// Size of the identity-interaction sub-sweep: a tenth of the main
    /// sweep, at least one trial.
    pub fn identity_trials(&self) -> usize {
        (self.trials / 10).max(1)
    }
}

/// Outcome of one random instance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TrialRecord {
    pub index: u64,
    pub family: Family,
    pub dim: usize,
    pub probe_dim: usize,
    pub edr: EDRReport,
    pub lu: LocallyUniformEDR,
    pub precision: PrecisionReport,
    /// `σ(A)η ≥ robertson` whenever `ε` vanishes.
    pub db_holds: bool,
    /// `εσ(B) ≥ robertson` whenever `η` vanishes.
    pub eb_holds: bool,
    /// `ε ≤ ε̄` and `η ≤ η̄`.
    pub lu_dominates: bool,
    /// `|ε − ε_G|` when `A(0)` and `M(Δt)` commute in the state.
    pub commuting_gap: Option<f64>,
}

fn corollaries(edr: &EDRReport) -> (bool, bool) {
    let db = edr.epsilon > VANISHING || edr.precise_bound_holds();
    let eb = edr.eta > VANISHING || edr.nondisturbing_bound_holds();
    (db, eb)
}

fn pick_dim<R: Rng + ?Sized>(rng: &mut R, spec: &SweepSpec) -> usize {
    rng.random_range(spec.min_dim..=spec.max_dim)
}

/// Trial `index`: an instance from the family assigned to the index, a
/// random second observable `B`, and every check evaluated on it.
pub fn run_trial(spec: &SweepSpec, index: u64, tol: &Tolerances) -> Result<TrialRecord> {
    let mut rng = trial_rng(spec.seed, index);
    let family = Family::for_trial(index);
    let dim = pick_dim(&mut rng, spec);
    let inst = random_instance(&mut rng, family, dim)?;
    let b = random_observable(&mut rng, dim);
    let (mp, a, rho) = (&inst.process, &inst.a, &inst.rho);

    let edr = edr_ledger(mp, a, &b, rho)?;
    let lu = locally_uniform_edr(mp, a, &b, rho, tol)?;
    let precision = theorem2_check(mp, a, rho, tol)?;
    let (db_holds, eb_holds) = corollaries(&edr);
    let lu_dominates = edr.epsilon <= lu.epsilon_bar + INEQUALITY_SLACK && edr.eta <= lu.eta_bar + INEQUALITY_SLACK;
    let commuting_gap = if meter_commutes_in_state(mp, a, rho, tol)? {
        let jd = measurement_joint_distribution(mp, a, rho, tol)?;
        Some((gauss_rms(&jd) - rms_error(mp, a, rho)?).abs())
    } else {
        None
    };
    Ok(TrialRecord {
        index,
        family,
        dim,
        probe_dim: mp.probe_dim(),
        edr,
        lu,
        precision,
        db_holds,
        eb_holds,
        lu_dominates,
        commuting_gap,
    })
}

/// Identity-interaction trial: `U = 1`, so `η = 0` and the Heisenberg-type
/// product vanishes while the Robertson bound generally does not.
pub fn run_identity_trial(spec: &SweepSpec, index: u64) -> Result<EDRReport> {
    let mut rng = trial_rng(spec.seed, IDENTITY_STREAM | index);
    let dim = pick_dim(&mut rng, spec);
    let k = rng.random_range(2..=dim);
    let probe = random_state(&mut rng, k);
    let meter = random_observable(&mut rng, k);
    let mp = crate::random::process_unchecked(probe, ComplexOperator::identity(dim * k), meter);
    let a = random_observable(&mut rng, dim);
    let b = random_observable(&mut rng, dim);
    let rho = random_state(&mut rng, dim);
    edr_ledger(&mp, &a, &b, &rho)
}

/// Gap above which a commuting-case comparison counts as a failure.
pub const COMMUTING_TOLERANCE: f64 = 1e-8;

/// Deterministic aggregate of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Census {
    pub trials: usize,
    pub identity_trials: usize,
    pub uedr_failures: usize,
    pub oedr_failures: usize,
    /// Over both the main sweep and the identity-interaction sub-sweep.
    pub heisenberg_violations: usize,
    pub identity_heisenberg_violations: usize,
    pub theorem2_disagreements: usize,
    pub strong_weak_disagreements: usize,
    pub lu_failures: usize,
    pub db_failures: usize,
    pub eb_failures: usize,
    pub dominance_failures: usize,
    pub precise_instances: usize,
    pub commuting_cases: usize,
    pub commuting_failures: usize,
    pub commuting_max_gap: f64,
}

impl Census {
    pub fn from_records(records: &[TrialRecord], identity: &[EDRReport]) -> Self {
        let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count();
        let gaps: Vec<f64> = records.iter().filter_map(|r| r.commuting_gap).collect();
        let identity_heisenberg_violations = identity.iter().filter(|e| !e.heisenberg_holds).count();
        Census {
            trials: records.len(),
            identity_trials: identity.len(),
            uedr_failures: count(&|r| !r.edr.uedr_holds) + identity.iter().filter(|e| !e.uedr_holds).count(),
            oedr_failures: count(&|r| !r.edr.oedr_holds) + identity.iter().filter(|e| !e.oedr_holds).count(),
            heisenberg_violations: count(&|r| !r.edr.heisenberg_holds) + identity_heisenberg_violations,
            identity_heisenberg_violations,
            theorem2_disagreements: count(&|r| !r.precision.all_agree()),
            strong_weak_disagreements: count(&|r| r.precision.strong_precise != r.precision.weak_precise),
            lu_failures: count(&|r| !r.lu.holds),
            db_failures: count(&|r| !r.db_holds) + identity.iter().filter(|e| !corollaries(e).0).count(),
            eb_failures: count(&|r| !r.eb_holds) + identity.iter().filter(|e| !corollaries(e).1).count(),
            dominance_failures: count(&|r| !r.lu_dominates),
            precise_instances: count(&|r| r.precision.strong_precise),
            commuting_cases: gaps.len(),
            commuting_failures: gaps.iter().filter(|&&g| g > COMMUTING_TOLERANCE).count(),
            commuting_max_gap: gaps.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Every universally valid relation held and the precision conditions
    /// agreed everywhere. Heisenberg-type violations never fail a sweep.
    pub fn passed(&self) -> bool {
        self.uedr_failures == 0
            && self.oedr_failures == 0
            && self.theorem2_disagreements == 0
            && self.strong_weak_disagreements == 0
            && self.lu_failures == 0
            && self.db_failures == 0
            && self.eb_failures == 0
            && self.dominance_failures == 0
            && self.commuting_failures == 0
    }
}

/// Sequential reference driver.
pub fn run_sweep(spec: &SweepSpec, tol: &Tolerances) -> Result<(Vec<TrialRecord>, Vec<EDRReport>, Census)> {
    let records = (0..spec.trials as u64).map(|i| run_trial(spec, i, tol)).collect::<Result<Vec<_>>>()?;
    let identity =
        (0..spec.identity_trials() as u64).map(|i| run_identity_trial(spec, i)).collect::<Result<Vec<_>>>()?;
    let census = Census::from_records(&records, &identity);
    Ok((records, identity, census))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(SweepSpec::new(2, 4, 10, 0).is_ok());
        assert!(SweepSpec::new(1, 4, 10, 0).is_err());
        assert!(SweepSpec::new(4, 2, 10, 0).is_err());
        assert!(SweepSpec::new(2, 9, 10, 0).is_err());
        assert!(SweepSpec::new(2, 4, 0, 0).is_err());
        assert_eq!(SweepSpec::new(2, 4, 5, 0).unwrap().identity_trials(), 1);
        assert_eq!(SweepSpec::new(2, 4, 1000, 0).unwrap().identity_trials(), 100);
    }

    #[test]
    fn small_sweep_passes() {
        let spec = SweepSpec::new(2, 3, 24, 11).unwrap();
        let (records, identity, census) = run_sweep(&spec, &Tolerances::default()).unwrap();
        assert_eq!(records.len(), 24);
        assert_eq!(identity.len(), 2);
        assert!(census.passed(), "{census:?}");
        assert!(census.precise_instances > 0);
        assert!(census.commuting_cases > 0);
    }

    #[test]
    fn trials_are_reproducible() {
        let spec = SweepSpec::new(2, 4, 8, 99).unwrap();
        let tol = Tolerances::default();
        for i in 0..8 {
            assert_eq!(run_trial(&spec, i, &tol).unwrap(), run_trial(&spec, i, &tol).unwrap());
        }
    }

    #[test]
    fn identity_trials_break_heisenberg() {
        let spec = SweepSpec::new(2, 4, 100, 5).unwrap();
        let reports: Vec<EDRReport> = (0..10).map(|i| run_identity_trial(&spec, i).unwrap()).collect();
        assert!(reports.iter().all(|e| e.eta == 0.0 || e.eta < 1e-12));
        assert!(reports.iter().any(|e| !e.heisenberg_holds));
        assert!(reports.iter().all(|e| e.uedr_holds && e.oedr_holds));
    }
}
