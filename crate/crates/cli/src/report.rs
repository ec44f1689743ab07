//! Report structures and their CSV renderings.

use std::path::{Path, PathBuf};

use qmeas_core::edr::{EDRReport, LocallyUniformEDR};
use qmeas_core::gaussian::ModelEDR;
use qmeas_core::instrument::OutcomeDistribution;
use qmeas_core::jpd::PrecisionReport;
use qmeas_core::sweep::{Census, SweepSpec, TrialRecord};
use qmeas_core::{PhysicalConstants, Tolerances};
use serde::Serialize;

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::error::CliError;
use crate::format::{InstrumentOut, JointOut, PovmOut, ProcessOut, WeakJointOut};

/// One asserted invariant of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteResults {
    pub edr: EDRReport,
    pub locally_uniform: LocallyUniformEDR,
    pub precision: PrecisionReport,
    pub probability_reproducible: bool,
    pub nondisturbing: bool,
    /// Present when `A(0)` and `M(Δt)` commute in the state.
    pub joint_distribution: Option<JointOut>,
    pub gauss_rms: Option<f64>,
    pub weak_joint_distribution: WeakJointOut,
    pub outcome_distribution: OutcomeDistribution,
    pub born_distribution: OutcomeDistribution,
    pub process: ProcessOut,
    pub instrument: InstrumentOut,
    pub povm: PovmOut,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianResults {
    #[serde(flatten)]
    pub edr: ModelEDR,
    /// `σ(x)σ(p_x)` of the object.
    pub object_uncertainty: f64,
    /// `σ(y)σ(p_y)` of the probe.
    pub probe_uncertainty: f64,
    pub sigma_x: f64,
    pub sigma_px: f64,
    /// `εη + εσ(p_x) + σ(x)η`
    pub oedr_lhs: f64,
    /// `σ(x)η`
    pub db_product: f64,
    /// Spread of `x(Δt)` given the reading, when `x(Δt)` and `y(Δt)` commute.
    pub conditional_position_spread: Option<f64>,
    /// Largest pointwise gap between the reading density and the Born
    /// density over the grid.
    pub max_density_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResults {
    pub spec: SweepSpec,
    pub census: Census,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Results {
    FiniteProcess(Box<FiniteResults>),
    GaussianModel(GaussianResults),
    Sweep(SweepResults),
}

/// Contents of `report.json`. `wall_time_s` is the only field that varies
/// between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioConfig,
    pub kind: ScenarioKind,
    pub constants: PhysicalConstants,
    pub tolerances: Tolerances,
    pub results: Results,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::io(path, e.into());
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

/// A computed run ready to be written out.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub report: RunReport,
    /// Rows of `report.csv`.
    pub table: Table,
    /// Additional CSV files by name.
    pub extra: Vec<(String, Table)>,
}

impl Rendered {
    /// Writes `report.json`, `report.csv` and the extra tables, returning
    /// the paths written.
    pub fn write(&self, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        let json_path = out_dir.join("report.json");
        let mut json = serde_json::to_string_pretty(&self.report).map_err(|e| CliError::io(&json_path, e.into()))?;
        json.push('\n');
        std::fs::write(&json_path, json).map_err(|e| CliError::io(&json_path, e))?;
        let csv_path = out_dir.join("report.csv");
        self.table.write(&csv_path)?;
        let mut written = vec![json_path, csv_path];
        for (name, table) in &self.extra {
            let path = out_dir.join(name);
            table.write(&path)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Shortest round-trip text, switching to exponent form for very small or
/// very large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub const EDR_COLUMNS: [&str; 12] = [
    "epsilon",
    "eta",
    "sigma_A",
    "sigma_B",
    "robertson",
    "correlation_term",
    "heisenberg_product",
    "uedr_lhs",
    "oedr_lhs",
    "heisenberg_holds",
    "uedr_holds",
    "oedr_holds",
];

pub fn edr_cells(e: &EDRReport) -> Vec<String> {
    let mut cells: Vec<String> = [
        e.epsilon,
        e.eta,
        e.sigma_a,
        e.sigma_b,
        e.robertson,
        e.correlation_term,
        e.heisenberg_product,
        e.uedr_lhs,
        e.oedr_lhs,
    ]
    .into_iter()
    .map(num)
    .collect();
    cells.extend([e.heisenberg_holds, e.uedr_holds, e.oedr_holds].map(|b| b.to_string()));
    cells
}

pub fn edr_table(e: &EDRReport) -> Table {
    let mut t = Table::new(&EDR_COLUMNS);
    t.push(edr_cells(e));
    t
}

pub const MODEL_COLUMNS: [&str; 6] = ["model", "epsilon", "eta", "product", "hbar_over_2", "heisenberg_violated"];

pub fn model_table(m: &ModelEDR) -> Table {
    let mut t = Table::new(&MODEL_COLUMNS);
    t.push(vec![
        m.model.to_string(),
        num(m.epsilon),
        num(m.eta),
        num(m.product),
        num(m.kennard_bound),
        m.heisenberg_violated.to_string(),
    ]);
    t
}

pub fn density_table(grid: &[f64], output: &[f64], born: &[f64]) -> Table {
    let mut t = Table::new(&["x", "output_density", "born_density"]);
    for ((x, o), b) in grid.iter().zip(output).zip(born) {
        t.push(vec![num(*x), num(*o), num(*b)]);
    }
    t
}

const TRIAL_PREFIX: [&str; 4] = ["index", "family", "dim", "probe_dim"];
const TRIAL_SUFFIX: [&str; 13] = [
    "epsilon_bar",
    "eta_bar",
    "lu_lhs",
    "lu_holds",
    "strong_precise",
    "weak_precise",
    "eps_zero_on_cyclic",
    "prob_repro_on_cyclic",
    "precision_flags_agree",
    "db_holds",
    "eb_holds",
    "lu_dominates",
    "commuting_gap",
];

/// One row per main trial followed by one row per identity-interaction
/// trial. Identity rows leave every column outside the EDR block blank except
/// `index` and `family`.
pub fn sweep_table(records: &[TrialRecord], identity: &[EDRReport]) -> Table {
    let header: Vec<&str> = TRIAL_PREFIX.iter().chain(EDR_COLUMNS.iter()).chain(TRIAL_SUFFIX.iter()).copied().collect();
    let mut t = Table::new(&header);
    for r in records {
        let mut row =
            vec![r.index.to_string(), r.family.as_str().to_string(), r.dim.to_string(), r.probe_dim.to_string()];
        row.extend(edr_cells(&r.edr));
        row.extend([num(r.lu.epsilon_bar), num(r.lu.eta_bar), num(r.lu.lhs)]);
        let p = &r.precision;
        row.extend(
            [
                r.lu.holds,
                p.strong_precise,
                p.weak_precise,
                p.eps_zero_on_cyclic,
                p.prob_repro_on_cyclic,
                p.all_agree(),
                r.db_holds,
                r.eb_holds,
                r.lu_dominates,
            ]
            .map(|b| b.to_string()),
        );
        row.push(opt_num(r.commuting_gap));
        t.push(row);
    }
    for (i, e) in identity.iter().enumerate() {
        let mut row = vec![i.to_string(), "identity_interaction".to_string(), String::new(), String::new()];
        row.extend(edr_cells(e));
        row.extend(std::iter::repeat_n(String::new(), TRIAL_SUFFIX.len()));
        t.push(row);
    }
    t
}
