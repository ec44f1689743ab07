//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;

use qmeas::{execute, sweep_random, Overrides, ScenarioConfig};
use qmeas_core::edr::INEQUALITY_SLACK;
use qmeas_core::gaussian::{
    born_density, build_model, min_uncertainty_packet, model_edr, output_distribution, packet_with_position_variance,
    GaussianState, ModelId,
};
use qmeas_core::instrument::{
    choi_distance, dilate, instrument_from_process, luders_instrument, outcome_probabilities, povm_of_process,
};
use qmeas_core::jpd::{
    gauss_rms, is_precise, measurement_joint_distribution, meter_commutes_in_state, probability_reproducible,
    theorem2_check, Precision, PrecisionReport,
};
use qmeas_core::random::{
    independent_meter, observable_with_spectrum, random_gaussian_state, random_instrument_for_dilation,
    random_mixed_state, random_observable, random_state, small_integer_spectrum, trial_rng,
};
use qmeas_core::sweep::{Census, SweepSpec, TrialRecord};
use qmeas_core::{DensityOperator, HermitianObservable, PhysicalConstants, Tolerances};
use rand::Rng;

const KENNARD_TOL: f64 = 1e-12;
const VN_BOUND_SLACK: f64 = 1e-12;
const VN_SATURATION_TOL: f64 = 1e-10;
const PRECISE_BOUND_SLACK: f64 = 1e-10;
const EDR_SLACK: f64 = 1e-8;
const SQRT2_TOL: f64 = 1e-8;
const COMMUTING_TOL: f64 = 1e-8;
const CHOI_TOL: f64 = 1e-8;
const BORN_FINAL_RATIO: f64 = 1e-2;

const SEED: u64 = 0x5eed_2024;

struct Sweep {
    records: Vec<TrialRecord>,
    census: Census,
}

struct Ctx {
    tol: Tolerances,
    sweeps: Vec<Sweep>,
}

impl Ctx {
    fn records(&self) -> impl Iterator<Item = &TrialRecord> {
        self.sweeps.iter().flat_map(|s| s.records.iter())
    }

    fn total<F: Fn(&Census) -> usize>(&self, f: F) -> usize {
        self.sweeps.iter().map(|s| f(&s.census)).sum()
    }
}

type Verdict = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_hbar<R: Rng>(rng: &mut R) -> PhysicalConstants {
    PhysicalConstants::new(rng.random_range(0.1..10.0)).unwrap()
}

/// Plain-trace standard deviation, independent of the library's factored form.
fn sigma_oracle(a: &HermitianObservable, rho: &DensityOperator) -> f64 {
    let (am, r) = (a.matrix(), rho.matrix());
    let mean = (am * r).trace().re;
    let second = (am * am * r).trace().re;
    (second - mean * mean).max(0.0).sqrt()
}

fn kennard_saturation(_: &Ctx) -> Verdict {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let mut rng = trial_rng(SEED, i);
        let c = random_hbar(&mut rng);
        let q = rng.random_range(-5.0..5.0);
        let p = rng.random_range(-5.0..5.0);
        let q1 = rng.random_range(0.05..5.0);
        let s = min_uncertainty_packet(q, p, q1, &c).unwrap();
        let cov = s.cov();
        let product = (cov[0][0] * cov[1][1]).sqrt();
        worst = worst.max((product - c.kennard_bound()).abs()).max((s.uncertainty_product() - c.kennard_bound()).abs());
    }
    ensure(worst <= KENNARD_TOL, format!("max |σ(q)σ(p) − ħ/2| = {worst:.2e} over 100 packets (tol {KENNARD_TOL:e})"))
}

fn von_neumann_edr(_: &Ctx) -> Verdict {
    let model = build_model(ModelId::VonNeumann);
    let mut min_margin = f64::INFINITY;
    let mut oracle_gap: f64 = 0.0;
    for i in 0..100 {
        let mut rng = trial_rng(SEED + 2, i);
        let c = random_hbar(&mut rng);
        let object = random_gaussian_state(&mut rng, &c);
        let probe = random_gaussian_state(&mut rng, &c);
        let r = model_edr(&model, &object, &probe, &c);
        let (m, v) = (probe.mean(), probe.cov());
        let eps = (v[0][0] + m[0] * m[0]).sqrt();
        let eta = (v[1][1] + m[1] * m[1]).sqrt();
        oracle_gap = oracle_gap.max((r.epsilon - eps).abs() / eps.max(1.0)).max((r.eta - eta).abs() / eta.max(1.0));
        min_margin = min_margin.min(r.product - c.kennard_bound());
    }
    let mut saturation: f64 = 0.0;
    for q1 in [0.1, 0.5, 1.0, 2.0, 7.0] {
        let c = PhysicalConstants::default();
        let object = min_uncertainty_packet(0.4, -0.3, 1.3, &c).unwrap();
        let probe = min_uncertainty_packet(0.0, 0.0, q1, &c).unwrap();
        let r = model_edr(&model, &object, &probe, &c);
        saturation = saturation.max((r.product - c.kennard_bound()).abs());
    }
    ensure(
        min_margin >= -VN_BOUND_SLACK && saturation <= VN_SATURATION_TOL && oracle_gap <= 1e-12,
        format!(
            "min εη − ħ/2 = {min_margin:.3e} over 100 probes (slack {VN_BOUND_SLACK:e}); \
             minimum-uncertainty probe |εη − ħ/2| = {saturation:.2e} (tol {VN_SATURATION_TOL:e}); \
             closed-form ε, η agree to {oracle_gap:.1e}"
        ),
    )
}

fn zero_error_violation(_: &Ctx) -> Verdict {
    let model = build_model(ModelId::Ozawa1988);
    let mut all_zero = true;
    let mut min_db = f64::INFINITY;
    let mut oracle_gap: f64 = 0.0;
    for i in 0..100 {
        let mut rng = trial_rng(SEED + 3, i);
        let c = random_hbar(&mut rng);
        let object = random_gaussian_state(&mut rng, &c);
        let probe = random_gaussian_state(&mut rng, &c);
        let r = model_edr(&model, &object, &probe, &c);
        all_zero &= r.epsilon == 0.0 && r.product == 0.0 && r.heisenberg_violated && r.product < r.kennard_bound;
        let (mo, vo, mp, vp) = (object.mean(), object.cov(), probe.mean(), probe.cov());
        let eta = (vo[1][1] + vp[1][1] + (mo[1] + mp[1]).powi(2)).sqrt();
        oracle_gap = oracle_gap.max((r.eta - eta).abs() / eta.max(1.0));
        min_db = min_db.min(object.sigma_q() * r.eta - c.kennard_bound());
    }
    let text = std::fs::read_to_string(scenario("zero_error_model.json")).map_err(|e| e.to_string())?;
    let rendered = execute(&ScenarioConfig::from_json(&text).map_err(|e| e.to_string())?, &Overrides::default())
        .map_err(|e| e.to_string())?;
    let report = serde_json::to_value(&rendered.report).unwrap();
    let scenario_ok = report["results"]["epsilon"] == 0.0
        && report["results"]["heisenberg_violated"] == true
        && report["passed"] == true;
    ensure(
        all_zero && min_db >= -PRECISE_BOUND_SLACK && scenario_ok && oracle_gap <= 1e-12,
        format!(
            "ε = 0 and product 0 < ħ/2 in 100/100 inputs: {all_zero}; min σ(x)η − ħ/2 = {min_db:.3e} \
             (slack {PRECISE_BOUND_SLACK:e}); unit-packet scenario ok: {scenario_ok}"
        ),
    )
}

fn universality_sweep(ctx: &Ctx) -> Verdict {
    let trials = ctx.total(|c| c.trials);
    let uedr = ctx.total(|c| c.uedr_failures);
    let oedr = ctx.total(|c| c.oedr_failures);
    let recomputed = ctx
        .records()
        .filter(|r| {
            let e = &r.edr;
            e.uedr_lhs < e.robertson - EDR_SLACK || e.oedr_lhs < e.robertson - EDR_SLACK
        })
        .count();
    let identity = ctx.total(|c| c.identity_heisenberg_violations);
    let heis = ctx.total(|c| c.heisenberg_violations);
    ensure(
        INEQUALITY_SLACK == EDR_SLACK && trials >= 1000 && uedr == 0 && oedr == 0 && recomputed == 0 && identity >= 1,
        format!(
            "{trials} trials: uedr failures {uedr}, oedr failures {oedr} (slack {EDR_SLACK:e}); \
             identity sub-sweep heisenberg violations {identity} (total {heis})"
        ),
    )
}

fn constructed_precision_cases(tol: &Tolerances) -> (usize, usize) {
    let mut positive = 0;
    let mut negative = 0;
    for i in 0..25 {
        let mut rng = trial_rng(SEED + 5, i);
        let d = rng.random_range(2..=4);
        let spectrum = small_integer_spectrum(&mut rng, d);
        let a = observable_with_spectrum(&mut rng, &spectrum);
        let rho = random_state(&mut rng, d);
        let mp = dilate(&luders_instrument(&a, tol).unwrap(), tol).unwrap();
        let p = theorem2_check(&mp, &a, &rho, tol).unwrap();
        if p == all_flags(true) {
            positive += 1;
        }
        let rho = random_mixed_state(&mut rng, d);
        let a = random_observable(&mut rng, d);
        let p = theorem2_check(&independent_meter(&a, &rho), &a, &rho, tol).unwrap();
        if p == all_flags(false) {
            negative += 1;
        }
    }
    (positive, negative)
}

fn all_flags(v: bool) -> PrecisionReport {
    PrecisionReport { strong_precise: v, weak_precise: v, eps_zero_on_cyclic: v, prob_repro_on_cyclic: v }
}

fn precision_equivalence(ctx: &Ctx) -> Verdict {
    let total = ctx.records().count();
    let agree = ctx.records().filter(|r| r.precision.all_agree()).count();
    let precise = ctx.records().filter(|r| r.precision.strong_precise).count();
    let (pos, neg) = constructed_precision_cases(&ctx.tol);
    ensure(
        total >= 500 && agree == total && precise > 0 && precise < total && pos == 25 && neg == 25,
        format!(
            "random: {agree}/{total} agree ({precise} precise); dilated Lüders all-true {pos}/25; \
             independent meter all-false {neg}/25"
        ),
    )
}

fn independent_meter_counterexample(ctx: &Ctx) -> Verdict {
    let tol = &ctx.tol;
    let mut worst: f64 = 0.0;
    let mut flags_ok = 0;
    for i in 0..20 {
        let mut rng = trial_rng(SEED + 6, i);
        let d = rng.random_range(2..=4);
        let a = random_observable(&mut rng, d);
        let rho = random_mixed_state(&mut rng, d);
        let mp = independent_meter(&a, &rho);
        let repro = probability_reproducible(&mp, &a, &rho, tol).unwrap();
        let strong = is_precise(&mp, &a, &rho, Precision::Strong, tol).unwrap();
        let weak = is_precise(&mp, &a, &rho, Precision::Weak, tol).unwrap();
        if repro && !strong && !weak {
            flags_ok += 1;
        }
        let g = gauss_rms(&measurement_joint_distribution(&mp, &a, &rho, tol).unwrap());
        worst = worst.max((g - 2f64.sqrt() * sigma_oracle(&a, &rho)).abs());
    }
    let text = std::fs::read_to_string(scenario("independent_meter.json")).map_err(|e| e.to_string())?;
    let rendered = execute(&ScenarioConfig::from_json(&text).map_err(|e| e.to_string())?, &Overrides::default())
        .map_err(|e| e.to_string())?;
    let r = serde_json::to_value(&rendered.report).unwrap();
    let scenario_gap = (r["results"]["gauss_rms"].as_f64().unwrap_or(f64::NAN) - 2f64.sqrt()).abs();
    let scenario_ok = r["results"]["probability_reproducible"] == true
        && r["results"]["precision"]["strong_precise"] == false
        && scenario_gap <= SQRT2_TOL;
    ensure(
        flags_ok == 20 && worst <= SQRT2_TOL && scenario_ok,
        format!(
            "reproducible but not precise in {flags_ok}/20; max |ε_G − √2σ(A)| = {worst:.2e} (tol {SQRT2_TOL:e}); \
             scenario file ok: {scenario_ok}"
        ),
    )
}

fn commuting_agreement(ctx: &Ctx) -> Verdict {
    let tol = &ctx.tol;
    let mut cases = ctx.total(|c| c.commuting_cases);
    let mut worst = ctx.sweeps.iter().map(|s| s.census.commuting_max_gap).fold(0.0, f64::max);
    for i in 0..20 {
        let mut rng = trial_rng(SEED + 7, i);
        let d = rng.random_range(2..=4);
        let a = random_observable(&mut rng, d);
        let rho = random_mixed_state(&mut rng, d);
        let mp = independent_meter(&a, &rho);
        if meter_commutes_in_state(&mp, &a, &rho, tol).unwrap() {
            cases += 1;
            let g = gauss_rms(&measurement_joint_distribution(&mp, &a, &rho, tol).unwrap());
            let e = qmeas_core::edr::rms_error(&mp, &a, &rho).unwrap();
            worst = worst.max((g - e).abs());
        }
    }
    let failures = ctx.total(|c| c.commuting_failures);
    ensure(
        cases > 20 && failures == 0 && worst <= COMMUTING_TOL,
        format!("{cases} commuting instances; max |ε − ε_G| = {worst:.2e} (tol {COMMUTING_TOL:e})"),
    )
}

fn dilation_round_trip(ctx: &Ctx) -> Verdict {
    let tol = &ctx.tol;
    let mut worst: f64 = 0.0;
    let mut prob_gap: f64 = 0.0;
    for i in 0..200 {
        let mut rng = trial_rng(SEED + 8, i);
        let d = 2 + (i as usize % 3);
        let ins = random_instrument_for_dilation(&mut rng, d).unwrap();
        let mp = dilate(&ins, tol).unwrap();
        let back = instrument_from_process(&mp, tol).unwrap();
        worst = worst.max(choi_distance(&ins, &back, tol).unwrap());
        let rho = random_state(&mut rng, d);
        let direct = outcome_probabilities(&ins, &rho, tol).unwrap();
        let via_povm = povm_of_process(&mp, tol).unwrap().probabilities(&rho, tol).unwrap();
        prob_gap = prob_gap.max(direct.max_gap(&via_povm, tol.eq_tol));
    }
    ensure(
        worst <= CHOI_TOL && prob_gap <= CHOI_TOL,
        format!("200 instruments: max Choi deviation {worst:.2e}, max outcome-probability gap {prob_gap:.2e} (tol {CHOI_TOL:e})"),
    )
}

fn locally_uniform(ctx: &Ctx) -> Verdict {
    let lu = ctx.total(|c| c.lu_failures);
    let dom = ctx.total(|c| c.dominance_failures);
    let c = PhysicalConstants::default();
    let unit = min_uncertainty_packet(0.0, 0.0, 1.0, &c).unwrap();
    let r = model_edr(&build_model(ModelId::Ozawa1988), &unit, &unit, &c);
    let gaussian_ok = r.epsilon_bar == Some(0.0)
        && r.lu_product == Some(0.0)
        && r.lu_product.unwrap() < c.kennard_bound()
        && r.lu_heisenberg_violated;
    ensure(
        lu == 0 && dom == 0 && gaussian_ok,
        format!(
            "{} trials: locally uniform OEDR failures {lu}, ε ≤ ε̄ / η ≤ η̄ failures {dom}; \
             zero-error model ε̄ = {:?}, ε̄η̄ = {:?} < ħ/2",
            ctx.total(|c| c.trials),
            r.epsilon_bar,
            r.lu_product
        ),
    )
}

fn born_limit(_: &Ctx) -> Verdict {
    let c = PhysicalConstants::default();
    let model = build_model(ModelId::VonNeumann);
    let object: GaussianState = min_uncertainty_packet(0.3, 0.2, 1.0, &c).unwrap();
    let grid: Vec<f64> = (0..2401).map(|i| -6.0 + 0.005 * i as f64).collect();
    let born = born_density(&object, &grid).unwrap();
    let peak = born.iter().copied().fold(0.0, f64::max);
    let mut gaps = Vec::new();
    let mut oracle_gap: f64 = 0.0;
    for v in [1.0, 0.1, 0.01, 0.001] {
        let probe = packet_with_position_variance(0.0, 0.0, v, &c).unwrap();
        let out = output_distribution(&model, &object, &probe, &grid).unwrap();
        let var = object.cov()[0][0] + v;
        for (x, o) in grid.iter().zip(&out) {
            let expect = (-(x - 0.3).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
            oracle_gap = oracle_gap.max((o - expect).abs());
        }
        gaps.push(out.iter().zip(&born).map(|(o, b)| (o - b).abs()).fold(0.0, f64::max));
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let ratio = gaps[3] / peak;
    ensure(
        decreasing && ratio <= BORN_FINAL_RATIO && oracle_gap <= 1e-12,
        format!(
            "gaps {:.3e}, {:.3e}, {:.3e}, {:.3e}; strictly decreasing: {decreasing}; final/peak = {ratio:.2e} \
             (limit {BORN_FINAL_RATIO:e})",
            gaps[0], gaps[1], gaps[2], gaps[3]
        ),
    )
}

fn scenario(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run_sweep(min: usize, max: usize, trials: usize, seed: u64, tol: &Tolerances) -> Sweep {
    let spec = SweepSpec::new(min, max, trials, seed).unwrap();
    let (records, _identity, census) = sweep_random(&spec, tol).unwrap();
    Sweep { records, census }
}

type Check = (u8, &'static str, fn(&Ctx) -> Verdict);

const CRITERIA: [Check; 10] = [
    (1, "Kennard saturation", kennard_saturation),
    (2, "von Neumann model EDR", von_neumann_edr),
    (3, "Heisenberg-EDR violation with precise bound", zero_error_violation),
    (4, "universality sweep", universality_sweep),
    (5, "precision characterization", precision_equivalence),
    (6, "independent-meter counterexample", independent_meter_counterexample),
    (7, "commuting-case agreement", commuting_agreement),
    (8, "dilation round trip", dilation_round_trip),
    (9, "locally uniform EDR", locally_uniform),
    (10, "Born-limit convolution", born_limit),
];

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let ctx = Ctx { tol, sweeps: vec![run_sweep(2, 4, 1000, SEED, &tol), run_sweep(5, 8, 100, SEED + 1, &tol)] };
    let mut failed = 0;
    for (id, name, check) in CRITERIA {
        let verdict = catch_unwind(AssertUnwindSafe(|| check(&ctx))).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("PASS criterion {id} ({name}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}): {detail}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
