//! JSON shapes for operators, states, processes and distributions.
//!
//! Matrices are row-major arrays of rows. On input an entry may be a bare
//! real number or an `[re, im]` pair; on output every entry is a pair.

use qmeas_core::instrument::{CPInstrument, MeasuringProcess, POVM};
use qmeas_core::jpd::{JointDistribution, WeakJointDistribution};
use qmeas_core::{CMatrix, CVector, ComplexOperator, DensityOperator, HermitianObservable, Tolerances, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> C64 {
        match self {
            Entry::Real(re) => C64::new(re, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

pub type MatrixDto = Vec<Vec<Entry>>;

/// `[re, im]` pairs, row-major.
pub type MatrixOut = Vec<Vec<[f64; 2]>>;

pub fn parse_matrix(rows: &MatrixDto, what: &str) -> Result<CMatrix, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::schema(format!("{what}: empty matrix")));
    }
    let cols = rows[0].len();
    if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
        return Err(CliError::schema(format!("{what}: row {bad} has {} entries, expected {cols}", rows[bad].len())));
    }
    Ok(CMatrix::from_fn(n, cols, |i, j| rows[i][j].value()))
}

pub fn parse_operator(rows: &MatrixDto, what: &str) -> Result<ComplexOperator, CliError> {
    ComplexOperator::new(parse_matrix(rows, what)?).map_err(|e| CliError::invalid(what, e))
}

pub fn parse_observable(rows: &MatrixDto, what: &str, tol: &Tolerances) -> Result<HermitianObservable, CliError> {
    HermitianObservable::new(parse_operator(rows, what)?, tol).map_err(|e| CliError::invalid(what, e))
}

pub fn matrix_out(m: &CMatrix) -> MatrixOut {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

/// A state given either as a density matrix or as a (normalized) ket.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum StateDto {
    Ket { ket: Vec<Entry> },
    Matrix(MatrixDto),
}

pub fn parse_state(state: &StateDto, what: &str, tol: &Tolerances) -> Result<DensityOperator, CliError> {
    match state {
        StateDto::Ket { ket } => {
            if ket.is_empty() {
                return Err(CliError::schema(format!("{what}: empty ket")));
            }
            let psi = CVector::from_iterator(ket.len(), ket.iter().map(|e| e.value()));
            DensityOperator::pure(&psi).map_err(|e| CliError::invalid(what, e))
        }
        StateDto::Matrix(rows) => {
            DensityOperator::new(parse_operator(rows, what)?, tol).map_err(|e| CliError::invalid(what, e))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessDto {
    pub probe_state: StateDto,
    pub unitary: MatrixDto,
    pub meter: MatrixDto,
}

pub fn parse_process(dto: &ProcessDto, tol: &Tolerances) -> Result<MeasuringProcess, CliError> {
    let probe = parse_state(&dto.probe_state, "process.probe_state", tol)?;
    let unitary = parse_operator(&dto.unitary, "process.unitary")?;
    let meter = parse_observable(&dto.meter, "process.meter", tol)?;
    MeasuringProcess::new(probe, unitary, meter, tol).map_err(|e| CliError::invalid("process", e))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentDto {
    pub dim: usize,
    pub outcomes: Vec<f64>,
    /// Kraus operators per outcome.
    pub kraus: Vec<Vec<MatrixDto>>,
}

pub fn parse_instrument(dto: &InstrumentDto, tol: &Tolerances) -> Result<CPInstrument, CliError> {
    let kraus = dto
        .kraus
        .iter()
        .enumerate()
        .map(|(i, ks)| {
            ks.iter()
                .enumerate()
                .map(|(k, m)| parse_operator(m, &format!("instrument.kraus[{i}][{k}]")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    CPInstrument::new(dto.dim, dto.outcomes.clone(), kraus, tol).map_err(|e| CliError::invalid("instrument", e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessOut {
    pub system_dim: usize,
    pub probe_dim: usize,
    pub probe_state: MatrixOut,
    pub unitary: MatrixOut,
    pub meter: MatrixOut,
}

impl From<&MeasuringProcess> for ProcessOut {
    fn from(mp: &MeasuringProcess) -> Self {
        ProcessOut {
            system_dim: mp.system_dim(),
            probe_dim: mp.probe_dim(),
            probe_state: matrix_out(mp.probe_state().matrix()),
            unitary: matrix_out(mp.unitary().matrix()),
            meter: matrix_out(mp.meter().matrix()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstrumentOut {
    pub dim: usize,
    pub outcomes: Vec<f64>,
    pub kraus: Vec<Vec<MatrixOut>>,
}

impl From<&CPInstrument> for InstrumentOut {
    fn from(ins: &CPInstrument) -> Self {
        InstrumentOut {
            dim: ins.dim(),
            outcomes: ins.outcomes().to_vec(),
            kraus: ins.kraus().iter().map(|ks| ks.iter().map(|k| matrix_out(k.matrix())).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PovmOut {
    pub outcomes: Vec<f64>,
    pub effects: Vec<MatrixOut>,
}

impl From<&POVM> for PovmOut {
    fn from(povm: &POVM) -> Self {
        PovmOut {
            outcomes: povm.outcomes().to_vec(),
            effects: povm.effects().iter().map(|e| matrix_out(e.matrix())).collect(),
        }
    }
}

/// Joint distribution with real weights, `weights[i][j]` for `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointOut {
    pub x_atoms: Vec<f64>,
    pub y_atoms: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

impl From<&JointDistribution> for JointOut {
    fn from(jd: &JointDistribution) -> Self {
        JointOut { x_atoms: jd.x_atoms.clone(), y_atoms: jd.y_atoms.clone(), weights: jd.weights.clone() }
    }
}

/// Weak joint distribution with `[re, im]` weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakJointOut {
    pub x_atoms: Vec<f64>,
    pub y_atoms: Vec<f64>,
    pub weights: Vec<Vec<[f64; 2]>>,
}

impl From<&WeakJointDistribution> for WeakJointOut {
    fn from(jd: &WeakJointDistribution) -> Self {
        WeakJointOut {
            x_atoms: jd.x_atoms.clone(),
            y_atoms: jd.y_atoms.clone(),
            weights: jd.weights.iter().map(|row| row.iter().map(|w| [w.re, w.im]).collect()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn mixed_entry_forms() {
        let rows: MatrixDto = serde_json::from_str("[[1, [0, -1]], [[0, 1], -1]]").unwrap();
        let m = parse_matrix(&rows, "m").unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, -1.0));
        assert_eq!(m[(1, 1)], C64::new(-1.0, 0.0));
        assert!(parse_observable(&rows, "m", &tol()).is_ok());
        assert_eq!(matrix_out(&m)[0][1], [0.0, -1.0]);
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let rows: MatrixDto = serde_json::from_str("[[1, 0], [0]]").unwrap();
        assert!(matches!(parse_matrix(&rows, "m"), Err(CliError::Schema(_))));
    }

    #[test]
    fn ket_and_matrix_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ket: StateDto = serde_json::from_str(&format!("{{\"ket\": [{s}, {s}]}}")).unwrap();
        let rho = parse_state(&ket, "rho", &tol()).unwrap();
        assert!((rho.matrix()[(0, 1)].re - 0.5).abs() < 1e-15);
        let mat: StateDto = serde_json::from_str("[[0.5, 0.5], [0.5, 0.5]]").unwrap();
        assert!(parse_state(&mat, "rho", &tol()).unwrap().op().approx_eq(rho.op(), 1e-12));
        let bad: StateDto = serde_json::from_str("[[2, 0], [0, -1]]").unwrap();
        assert!(parse_state(&bad, "rho", &tol()).is_err());
    }

    #[test]
    fn instrument_round_trip() {
        let dto: InstrumentDto = serde_json::from_str(
            r#"{"dim": 2, "outcomes": [1, -1], "kraus": [[[[1, 0], [0, 0]]], [[[0, 0], [0, 1]]]]}"#,
        )
        .unwrap();
        let ins = parse_instrument(&dto, &tol()).unwrap();
        let out = InstrumentOut::from(&ins);
        assert_eq!(out.outcomes, vec![1.0, -1.0]);
        assert_eq!(out.kraus[1][0][1][1], [1.0, 0.0]);
    }
}
