//! Scenario files and the resolution of constants and tolerances.

use std::path::Path;

use qmeas_core::gaussian::{min_uncertainty_packet, GaussianState, ModelId};
use qmeas_core::sweep::SweepSpec;
use qmeas_core::{PhysicalConstants, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::format::{InstrumentDto, MatrixDto, ProcessDto, StateDto};

/// Environment variable that replaces the default equality tolerance.
pub const TOL_ENV: &str = "QMEAS_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FiniteProcess,
    GaussianModel,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsDto {
    pub hbar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesDto {
    pub eq_tol: Option<f64>,
    pub psd_tol: Option<f64>,
}

/// Top level of a scenario file. The payload is kept as raw JSON until
/// [`ScenarioConfig::payload`] checks it against the schema of `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub payload: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesDto>,
}

/// Exactly one of `process`, `instrument` or `luders` describes the
/// measurement; `luders` is an observable whose Lüders instrument is
/// dilated into a process.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteProcessPayload {
    pub process: Option<ProcessDto>,
    pub instrument: Option<InstrumentDto>,
    pub luders: Option<MatrixDto>,
    #[serde(rename = "A")]
    pub a: MatrixDto,
    #[serde(rename = "B")]
    pub b: MatrixDto,
    pub rho: StateDto,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GaussianDto {
    Packet { packet: PacketDto },
    Moments { mean: [f64; 2], cov: [[f64; 2]; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketDto {
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub p: f64,
    pub q1: f64,
}

impl GaussianDto {
    pub fn build(
        &self,
        what: &str,
        constants: &PhysicalConstants,
        tol: &Tolerances,
    ) -> Result<GaussianState, CliError> {
        match self {
            GaussianDto::Packet { packet } => min_uncertainty_packet(packet.q, packet.p, packet.q1, constants),
            GaussianDto::Moments { mean, cov } => GaussianState::new(*mean, *cov, constants, tol),
        }
        .map_err(|e| CliError::invalid(what, e))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridDto {
    Points(Vec<f64>),
    Linspace { start: f64, stop: f64, points: usize },
}

impl GridDto {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        match *self {
            GridDto::Points(ref xs) => Ok(xs.clone()),
            GridDto::Linspace { start, stop, points } => {
                if points < 2 || start.is_nan() || stop.is_nan() || start >= stop {
                    return Err(CliError::schema("grid: need points >= 2 and start < stop"));
                }
                let step = (stop - start) / (points - 1) as f64;
                Ok((0..points).map(|i| start + step * i as f64).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPayload {
    pub model: ModelId,
    pub object: GaussianDto,
    pub probe: GaussianDto,
    pub grid: Option<GridDto>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DimsDto {
    Range(String),
    Pair([usize; 2]),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPayload {
    pub dims: DimsDto,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SweepPayload {
    pub fn spec(&self) -> Result<SweepSpec, CliError> {
        let (lo, hi) = match &self.dims {
            DimsDto::Range(s) => parse_dims(s)?,
            DimsDto::Pair([lo, hi]) => (*lo, *hi),
        };
        SweepSpec::new(lo, hi, self.trials, self.seed).map_err(|e| CliError::invalid("sweep", e))
    }
}

/// Inclusive dimension range: `"2..4"`, `"2..=4"` or a single `"3"`.
pub fn parse_dims(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::schema(format!("dims: cannot parse {text:?}, expected e.g. 2..4"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    match text.split_once("..") {
        Some((lo, hi)) => Ok((num(lo)?, num(hi.strip_prefix('=').unwrap_or(hi))?)),
        None => {
            let d = num(text)?;
            Ok((d, d))
        }
    }
}

pub enum Payload {
    FiniteProcess(Box<FiniteProcessPayload>),
    GaussianModel(GaussianPayload),
    Sweep(SweepPayload),
}

fn typed<T: serde::de::DeserializeOwned>(value: &serde_json::Value, kind: &str) -> Result<T, CliError> {
    T::deserialize(value).map_err(|e| CliError::schema(format!("{kind} payload: {e}")))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn payload(&self) -> Result<Payload, CliError> {
        Ok(match self.kind {
            ScenarioKind::FiniteProcess => {
                let p: FiniteProcessPayload = typed(&self.payload, "finite_process")?;
                let given = [p.process.is_some(), p.instrument.is_some(), p.luders.is_some()];
                if given.iter().filter(|&&g| g).count() != 1 {
                    return Err(CliError::schema(
                        "finite_process payload: give exactly one of process, instrument, luders",
                    ));
                }
                Payload::FiniteProcess(Box::new(p))
            }
            ScenarioKind::GaussianModel => Payload::GaussianModel(typed(&self.payload, "gaussian_model")?),
            ScenarioKind::Sweep => Payload::Sweep(typed(&self.payload, "sweep")?),
        })
    }
}

/// Values supplied outside the scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub hbar: Option<f64>,
    pub tol: Option<f64>,
    /// Raw value of [`TOL_ENV`], if set.
    pub env_tol: Option<String>,
}

impl Overrides {
    pub fn with_env(hbar: Option<f64>, tol: Option<f64>) -> Self {
        Overrides { hbar, tol, env_tol: std::env::var(TOL_ENV).ok() }
    }
}

/// `eq_tol` comes from the flag, else the file, else the environment, else
/// the default. `ħ` comes from the flag, else the file, else 1.
pub fn resolve(
    constants: Option<&ConstantsDto>,
    tolerances: Option<&TolerancesDto>,
    overrides: &Overrides,
) -> Result<(PhysicalConstants, Tolerances), CliError> {
    let env_tol = match overrides.env_tol.as_deref() {
        Some(raw) => {
            Some(raw.trim().parse::<f64>().map_err(|_| CliError::schema(format!("{TOL_ENV}: not a number: {raw:?}")))?)
        }
        None => None,
    };
    let file_tol = tolerances.cloned().unwrap_or_default();
    let eq_tol = overrides.tol.or(file_tol.eq_tol).or(env_tol).unwrap_or(Tolerances::DEFAULT_EQ_TOL);
    let psd_tol = file_tol.psd_tol.unwrap_or(Tolerances::DEFAULT_PSD_TOL);
    let tol = Tolerances::new(eq_tol, psd_tol).map_err(|e| CliError::invalid("tolerances", e))?;
    let hbar = overrides.hbar.or(constants.and_then(|c| c.hbar)).unwrap_or(PhysicalConstants::default().hbar);
    let constants = PhysicalConstants::new(hbar).map_err(|e| CliError::invalid("constants", e))?;
    Ok((constants, tol))
}
