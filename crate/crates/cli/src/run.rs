//! Scenario execution.

use std::path::Path;
use std::time::Instant;

use qmeas_core::edr::{edr_ledger, locally_uniform_edr, EDRReport, INEQUALITY_SLACK};
use qmeas_core::gaussian::{
    born_density, build_model, conditional_position_spread, model_edr, output_distribution, ModelId, KENNARD_SLACK,
};
use qmeas_core::instrument::{
    born_distribution, dilate, instrument_from_process, luders_instrument, outcome_probabilities, povm_of,
};
use qmeas_core::jpd::{
    gauss_rms, is_nondisturbing, measurement_joint_distribution, meter_commutes_in_state, probability_reproducible,
    theorem2_check, weak_joint_distribution,
};
use qmeas_core::sweep::{
    run_identity_trial, run_trial, Census, SweepSpec, TrialRecord, COMMUTING_TOLERANCE, VANISHING,
};
use qmeas_core::{PhysicalConstants, Tolerances};
use rayon::prelude::*;

use crate::config::{resolve, FiniteProcessPayload, GaussianPayload, Overrides, Payload, ScenarioConfig, ScenarioKind};
use crate::error::CliError;
use crate::format::{parse_instrument, parse_observable, parse_process, parse_state};
use crate::report::{
    density_table, edr_table, model_table, num, sweep_table, Check, FiniteResults, GaussianResults, Rendered, Results,
    RunReport, SweepResults, Table,
};

/// Slack for the Gaussian-level bounds other than the Heisenberg-type one.
pub const GAUSSIAN_SLACK: f64 = 1e-10;

struct Outcome {
    results: Results,
    checks: Vec<Check>,
    table: Table,
    extra: Vec<(String, Table)>,
}

/// Validates and evaluates a scenario without touching the filesystem.
pub fn execute(config: &ScenarioConfig, overrides: &Overrides) -> Result<Rendered, CliError> {
    let payload = config.payload()?;
    let (constants, tol) = resolve(config.constants.as_ref(), config.tolerances.as_ref(), overrides)?;
    let start = Instant::now();
    let out = match &payload {
        Payload::FiniteProcess(p) => finite_process(p, &tol)?,
        Payload::GaussianModel(p) => gaussian_model(p, &constants, &tol)?,
        Payload::Sweep(p) => sweep(&p.spec()?, &tol)?,
    };
    let wall_time_s = start.elapsed().as_secs_f64();
    let passed = out.checks.iter().all(|c| c.passed);
    Ok(Rendered {
        report: RunReport {
            scenario: config.clone(),
            kind: config.kind,
            constants,
            tolerances: tol,
            results: out.results,
            checks: out.checks,
            passed,
            wall_time_s,
        },
        table: out.table,
        extra: out.extra,
    })
}

/// Evaluates `config` and writes its reports into `out_dir`. Nothing is
/// written unless evaluation succeeds.
pub fn run_config(config: &ScenarioConfig, out_dir: &Path, overrides: &Overrides) -> Result<RunReport, CliError> {
    let rendered = execute(config, overrides)?;
    rendered.write(out_dir)?;
    Ok(rendered.report)
}

pub fn run_scenario(config_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<RunReport, CliError> {
    run_config(&ScenarioConfig::load(config_path)?, out_dir, overrides)
}

/// Sweep scenario equivalent to the `sweep` subcommand flags.
pub fn sweep_config(dims: &str, trials: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        kind: ScenarioKind::Sweep,
        payload: serde_json::json!({ "dims": dims, "trials": trials, "seed": seed }),
        constants: None,
        tolerances: None,
    }
}

fn finite_process(p: &FiniteProcessPayload, tol: &Tolerances) -> Result<Outcome, CliError> {
    let a = parse_observable(&p.a, "A", tol)?;
    let b = parse_observable(&p.b, "B", tol)?;
    let rho = parse_state(&p.rho, "rho", tol)?;
    let (mp, instrument) = if let Some(d) = &p.process {
        let mp = parse_process(d, tol)?;
        let ins = instrument_from_process(&mp, tol)?;
        (mp, ins)
    } else if let Some(d) = &p.instrument {
        let ins = parse_instrument(d, tol)?;
        (dilate(&ins, tol)?, ins)
    } else if let Some(l) = &p.luders {
        let l = parse_observable(l, "luders", tol)?;
        let ins = luders_instrument(&l, tol).map_err(|e| CliError::invalid("luders", e))?;
        (dilate(&ins, tol)?, ins)
    } else {
        return Err(CliError::schema("finite_process payload: no measurement given"));
    };
    for (what, dim) in [("A", a.dim()), ("B", b.dim()), ("rho", rho.dim())] {
        if dim != mp.system_dim() {
            return Err(CliError::schema(format!(
                "{what} has dimension {dim} but the measurement acts on dimension {}",
                mp.system_dim()
            )));
        }
    }

    let edr = edr_ledger(&mp, &a, &b, &rho)?;
    let lu = locally_uniform_edr(&mp, &a, &b, &rho, tol)?;
    let precision = theorem2_check(&mp, &a, &rho, tol)?;
    let commuting = meter_commutes_in_state(&mp, &a, &rho, tol)?;
    let joint = if commuting { Some(measurement_joint_distribution(&mp, &a, &rho, tol)?) } else { None };
    let g_rms = joint.as_ref().map(gauss_rms);

    let slack = INEQUALITY_SLACK;
    let mut checks = vec![
        Check::new("uedr", edr.uedr_holds, format!("{} >= {} - {slack:e}", num(edr.uedr_lhs), num(edr.robertson))),
        Check::new("oedr", edr.oedr_holds, format!("{} >= {} - {slack:e}", num(edr.oedr_lhs), num(edr.robertson))),
        Check::new("locally_uniform_oedr", lu.holds, format!("{} >= {} - {slack:e}", num(lu.lhs), num(lu.robertson))),
        Check::new(
            "locally_uniform_dominates",
            edr.epsilon <= lu.epsilon_bar + slack && edr.eta <= lu.eta_bar + slack,
            format!(
                "epsilon {} <= {}, eta {} <= {}",
                num(edr.epsilon),
                num(lu.epsilon_bar),
                num(edr.eta),
                num(lu.eta_bar)
            ),
        ),
        Check::new("precision_flags_agree", precision.all_agree(), format!("{precision:?}")),
    ];
    checks.extend(corollary_checks(&edr));
    if let Some(g) = g_rms {
        let gap = (g - edr.epsilon).abs();
        checks.push(Check::new(
            "commuting_gauss_rms",
            gap <= COMMUTING_TOLERANCE,
            format!("|{} - {}| = {} <= {COMMUTING_TOLERANCE:e}", num(g), num(edr.epsilon), num(gap)),
        ));
    }

    let results = FiniteResults {
        edr,
        locally_uniform: lu,
        precision,
        probability_reproducible: probability_reproducible(&mp, &a, &rho, tol)?,
        nondisturbing: is_nondisturbing(&mp, &b, &rho, tol)?,
        joint_distribution: joint.as_ref().map(Into::into),
        gauss_rms: g_rms,
        weak_joint_distribution: (&weak_joint_distribution(&mp, &a, &rho, tol)?).into(),
        outcome_distribution: outcome_probabilities(&instrument, &rho, tol)?,
        born_distribution: born_distribution(&a, &rho, tol)?,
        process: (&mp).into(),
        instrument: (&instrument).into(),
        povm: (&povm_of(&instrument, tol)?).into(),
    };
    Ok(Outcome {
        results: Results::FiniteProcess(Box::new(results)),
        checks,
        table: edr_table(&edr),
        extra: Vec::new(),
    })
}

/// The bounds that must hold once the error or the disturbance vanishes.
fn corollary_checks(edr: &EDRReport) -> Vec<Check> {
    let mut checks = Vec::new();
    if edr.epsilon <= VANISHING {
        checks.push(Check::new(
            "precise_bound",
            edr.precise_bound_holds(),
            format!("sigma_A*eta = {} >= {}", num(edr.sigma_a * edr.eta), num(edr.robertson)),
        ));
    }
    if edr.eta <= VANISHING {
        checks.push(Check::new(
            "nondisturbing_bound",
            edr.nondisturbing_bound_holds(),
            format!("epsilon*sigma_B = {} >= {}", num(edr.epsilon * edr.sigma_b), num(edr.robertson)),
        ));
    }
    checks
}

fn gaussian_model(p: &GaussianPayload, constants: &PhysicalConstants, tol: &Tolerances) -> Result<Outcome, CliError> {
    let object = p.object.build("object", constants, tol)?;
    let probe = p.probe.build("probe", constants, tol)?;
    let grid = p.grid.as_ref().map(|g| g.points()).transpose()?;
    let model = build_model(p.model);
    let edr = model_edr(&model, &object, &probe, constants);
    let (sigma_x, sigma_px) = (object.sigma_q(), object.sigma_p());
    let bound = constants.kennard_bound();
    let oedr_lhs = edr.product + edr.epsilon * sigma_px + sigma_x * edr.eta;
    let db_product = sigma_x * edr.eta;
    let spread = conditional_position_spread(&model, &object, &probe).ok();

    let mut extra = Vec::new();
    let mut max_density_gap = None;
    if let Some(grid) = &grid {
        let output = output_distribution(&model, &object, &probe, grid).map_err(|e| CliError::invalid("grid", e))?;
        let born = born_density(&object, grid).map_err(|e| CliError::invalid("grid", e))?;
        max_density_gap = Some(output.iter().zip(&born).map(|(o, b)| (o - b).abs()).fold(0.0, f64::max));
        extra.push(("densities.csv".to_string(), density_table(grid, &output, &born)));
    }

    let mut checks = vec![Check::new(
        "oedr",
        oedr_lhs >= bound - GAUSSIAN_SLACK,
        format!("{} >= {} - {GAUSSIAN_SLACK:e}", num(oedr_lhs), num(bound)),
    )];
    match p.model {
        ModelId::VonNeumann => {
            checks.push(Check::new(
                "heisenberg_bound",
                edr.product >= bound - KENNARD_SLACK,
                format!("{} >= {} - {KENNARD_SLACK:e}", num(edr.product), num(bound)),
            ));
            if let Some(s) = spread {
                checks.push(Check::new(
                    "conditional_spread",
                    s <= edr.epsilon + GAUSSIAN_SLACK,
                    format!("{} <= {}", num(s), num(edr.epsilon)),
                ));
            }
        }
        ModelId::Ozawa1988 => {
            checks.push(Check::new("zero_error", edr.epsilon == 0.0, format!("epsilon = {}", num(edr.epsilon))));
            checks.push(Check::new(
                "precise_bound",
                db_product >= bound - GAUSSIAN_SLACK,
                format!("sigma_x*eta = {} >= {} - {GAUSSIAN_SLACK:e}", num(db_product), num(bound)),
            ));
        }
    }

    let results = GaussianResults {
        edr,
        object_uncertainty: object.uncertainty_product(),
        probe_uncertainty: probe.uncertainty_product(),
        sigma_x,
        sigma_px,
        oedr_lhs,
        db_product,
        conditional_position_spread: spread,
        max_density_gap,
    };
    Ok(Outcome { results: Results::GaussianModel(results), checks, table: model_table(&edr), extra })
}

/// Runs every trial of `spec` in parallel. Records come back in index
/// order, so the result does not depend on scheduling.
pub fn sweep_random(
    spec: &SweepSpec,
    tol: &Tolerances,
) -> qmeas_core::Result<(Vec<TrialRecord>, Vec<EDRReport>, Census)> {
    let records = (0..spec.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(spec, i, tol))
        .collect::<qmeas_core::Result<Vec<_>>>()?;
    let identity = (0..spec.identity_trials() as u64)
        .into_par_iter()
        .map(|i| run_identity_trial(spec, i))
        .collect::<qmeas_core::Result<Vec<_>>>()?;
    let census = Census::from_records(&records, &identity);
    Ok((records, identity, census))
}

fn sweep(spec: &SweepSpec, tol: &Tolerances) -> Result<Outcome, CliError> {
    let (records, identity, census) = sweep_random(spec, tol)?;
    let zero = |name: &str, count: usize| Check::new(name, count == 0, format!("{count} failures"));
    let checks = vec![
        zero("uedr", census.uedr_failures),
        zero("oedr", census.oedr_failures),
        zero("precision_flags_agree", census.theorem2_disagreements),
        zero("strong_weak_agree", census.strong_weak_disagreements),
        zero("locally_uniform_oedr", census.lu_failures),
        zero("locally_uniform_dominates", census.dominance_failures),
        zero("precise_bound", census.db_failures),
        zero("nondisturbing_bound", census.eb_failures),
        zero("commuting_gauss_rms", census.commuting_failures),
    ];
    Ok(Outcome {
        results: Results::Sweep(SweepResults { spec: *spec, census }),
        checks,
        table: sweep_table(&records, &identity),
        extra: Vec::new(),
    })
}
