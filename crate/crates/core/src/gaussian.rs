//! Gaussian object and probe states coupled by a linear interaction, the
//! continuous-variable analogue of a measuring process for position.
//!
//! Everything is carried by first and second moments. Phase-space vectors
//! are ordered `(x, p_x, y, p_y)` with the object `(x, p_x)` first and the
//! probe `(y, p_y)` second; the coupling strength is fixed by `K·Δt = 1`.
//! A model is the Heisenberg-picture map `z(Δt) = S z(0)`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{Matrix2, Matrix4, RowVector4, SymmetricEigen, Vector4};
#[allow(unused_imports)]
use num_traits::Float;

use crate::constants::{PhysicalConstants, Tolerances};
use crate::error::{Error, Result};

pub type PhaseVector = Vector4<f64>;
pub type PhaseMatrix = Matrix4<f64>;

/// Slack used for the Kennard-type comparisons on Gaussian moments.
pub const KENNARD_SLACK: f64 = 1e-12;

const X: usize = 0;
const PX: usize = 1;
const Y: usize = 2;

/// A single-mode Gaussian state: means `(q, p)` and the symmetrized
/// covariance `[[Vqq, Vqp], [Vqp, Vpp]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianState {
    mean: [f64; 2],
    cov: [[f64; 2]; 2],
}

impl GaussianState {
    /// Validates symmetry, positivity and `det(cov) ≥ (ħ/2)² − eq_tol`.
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2], constants: &PhysicalConstants, tol: &Tolerances) -> Result<Self> {
        if mean.iter().chain(cov.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let asym = (cov[0][1] - cov[1][0]).abs();
        if asym > tol.eq_tol {
            return Err(Error::InvalidCovariance(alloc::format!("asymmetric covariance (off by {asym:e})")));
        }
        let vqp = 0.5 * (cov[0][1] + cov[1][0]);
        let cov = [[cov[0][0], vqp], [vqp, cov[1][1]]];
        if cov[0][0] < tol.psd_tol || cov[1][1] < tol.psd_tol {
            return Err(Error::InvalidCovariance("negative variance".into()));
        }
        let det = cov[0][0] * cov[1][1] - vqp * vqp;
        let bound = constants.kennard_bound().powi(2);
        if det < bound - tol.eq_tol {
            return Err(Error::InvalidCovariance(alloc::format!(
                "det(cov) = {det} violates the uncertainty bound {bound}"
            )));
        }
        Ok(Self { mean, cov })
    }

    pub fn mean(&self) -> [f64; 2] {
        self.mean
    }

    pub fn cov(&self) -> [[f64; 2]; 2] {
        self.cov
    }

    pub fn sigma_q(&self) -> f64 {
        self.cov[0][0].sqrt()
    }

    pub fn sigma_p(&self) -> f64 {
        self.cov[1][1].sqrt()
    }

    pub fn uncertainty_product(&self) -> f64 {
        self.sigma_q() * self.sigma_p()
    }

    fn cov_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.cov[0][0], self.cov[0][1], self.cov[1][0], self.cov[1][1])
    }
}

/// Minimum-uncertainty packet centred at `(q_center, p_center)` with
/// width parameter `q1`: `Vqq = q1²/2`, `Vpp = ħ²/(2q1²)`, `Vqp = 0`.
pub fn min_uncertainty_packet(
    q_center: f64,
    p_center: f64,
    q1: f64,
    constants: &PhysicalConstants,
) -> Result<GaussianState> {
    if !(q1 > 0.0 && q1.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("packet width must be positive, got {q1}")));
    }
    if !(q_center.is_finite() && p_center.is_finite()) {
        return Err(Error::NonFinite);
    }
    let hbar = constants.hbar;
    Ok(GaussianState { mean: [q_center, p_center], cov: [[q1 * q1 / 2.0, 0.0], [0.0, hbar * hbar / (2.0 * q1 * q1)]] })
}

/// Minimum-uncertainty packet with position variance `vqq`.
pub fn packet_with_position_variance(
    q_center: f64,
    p_center: f64,
    vqq: f64,
    constants: &PhysicalConstants,
) -> Result<GaussianState> {
    min_uncertainty_packet(q_center, p_center, (2.0 * vqq).sqrt(), constants)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelId {
    /// `H = K x p_y`: the probe position records the object position.
    #[cfg_attr(feature = "serde", serde(rename = "von_neumann"))]
    VonNeumann,
    /// The linear position measurement that has zero error yet escapes
    /// the Heisenberg-type bound.
    #[cfg_attr(feature = "serde", serde(rename = "ozawa_1988"))]
    Ozawa1988,
}

impl ModelId {
    pub const ALL: [ModelId; 2] = [ModelId::VonNeumann, ModelId::Ozawa1988];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::VonNeumann => "von_neumann",
            ModelId::Ozawa1988 => "ozawa_1988",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown model id {s:?}")))
    }
}

/// A linear interaction given by its Heisenberg-picture phase-space map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    model_id: ModelId,
    symplectic: PhaseMatrix,
}

/// The canonical symplectic metric on `(x, p_x, y, p_y)`.
pub fn symplectic_form() -> PhaseMatrix {
    #[rustfmt::skip]
    let j = PhaseMatrix::new(
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, -1.0, 0.0,
    );
    j
}

/// `max |S J Sᵀ − J|`
pub fn symplectic_defect(s: &PhaseMatrix) -> f64 {
    let j = symplectic_form();
    (s * j * s.transpose() - j).amax()
}

pub fn build_model(model_id: ModelId) -> LinearModel {
    #[rustfmt::skip]
    let symplectic = match model_id {
        // x ↦ x, p_x ↦ p_x − p_y, y ↦ x + y, p_y ↦ p_y
        ModelId::VonNeumann => PhaseMatrix::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, -1.0,
            1.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ),
        // x ↦ x − y, p_x ↦ −p_y, y ↦ x, p_y ↦ p_x + p_y
        ModelId::Ozawa1988 => PhaseMatrix::new(
            1.0, 0.0, -1.0, 0.0,
            0.0, 0.0, 0.0, -1.0,
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 1.0,
        ),
    };
    LinearModel { model_id, symplectic }
}

impl LinearModel {
    pub fn model_id(&self) -> ModelId {
        self.model_id
    }

    pub fn symplectic(&self) -> &PhaseMatrix {
        &self.symplectic
    }

    /// Coefficients of `z_k(Δt)` in terms of `z(0)`.
    pub fn evolved(&self, k: usize) -> RowVector4<f64> {
        self.symplectic.row(k).into_owned()
    }

    /// Coefficients of the noise operator `y(Δt) − x(0)`.
    pub fn noise_coefficients(&self) -> RowVector4<f64> {
        self.evolved(Y) - unit(X)
    }

    /// Coefficients of the momentum disturbance `p_x(Δt) − p_x(0)`.
    pub fn disturbance_coefficients(&self) -> RowVector4<f64> {
        self.evolved(PX) - unit(PX)
    }
}

fn unit(k: usize) -> RowVector4<f64> {
    let mut v = RowVector4::zeros();
    v[k] = 1.0;
    v
}

/// Joint means and covariance of the product state object ⊗ probe.
pub fn joint_moments(object: &GaussianState, probe: &GaussianState) -> (PhaseVector, PhaseMatrix) {
    let mean = PhaseVector::new(object.mean[0], object.mean[1], probe.mean[0], probe.mean[1]);
    let mut cov = PhaseMatrix::zeros();
    cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&object.cov_matrix());
    cov.fixed_view_mut::<2, 2>(2, 2).copy_from(&probe.cov_matrix());
    (mean, cov)
}

/// `⟨(c·z)²⟩ = cᵀ(V + μμᵀ)c`
fn second_moment(c: &RowVector4<f64>, mean: &PhaseVector, cov: &PhaseMatrix) -> f64 {
    let m = (c * mean)[0];
    (c * cov * c.transpose())[0] + m * m
}

fn has_object_part(c: &RowVector4<f64>) -> bool {
    c[0] != 0.0 || c[1] != 0.0
}

/// rms error, rms disturbance and their locally uniform counterparts for a
/// Gaussian model. `None` marks a locally uniform quantity that is
/// unbounded: the cyclic subspace of a Gaussian object is the whole
/// object space, so any object dependence of the noise can be driven
/// arbitrarily high.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ModelEDR {
    pub model: ModelId,
    pub epsilon: f64,
    pub eta: f64,
    pub product: f64,
    #[cfg_attr(feature = "serde", serde(rename = "hbar_over_2"))]
    pub kennard_bound: f64,
    pub heisenberg_violated: bool,
    pub epsilon_bar: Option<f64>,
    pub eta_bar: Option<f64>,
    /// `ε̄·η̄`, with `0·∞ = 0`; `None` when infinite.
    pub lu_product: Option<f64>,
    pub lu_heisenberg_violated: bool,
}

pub fn model_edr(
    model: &LinearModel,
    object: &GaussianState,
    probe: &GaussianState,
    constants: &PhysicalConstants,
) -> ModelEDR {
    let (mean, cov) = joint_moments(object, probe);
    let nc = model.noise_coefficients();
    let dc = model.disturbance_coefficients();
    let epsilon = second_moment(&nc, &mean, &cov).max(0.0).sqrt();
    let eta = second_moment(&dc, &mean, &cov).max(0.0).sqrt();
    let product = epsilon * eta;
    let kennard_bound = constants.kennard_bound();

    let epsilon_bar = (!has_object_part(&nc)).then_some(epsilon);
    let eta_bar = (!has_object_part(&dc)).then_some(eta);
    let lu_product = match (epsilon_bar, eta_bar) {
        (Some(e), Some(h)) => Some(e * h),
        (Some(0.0), None) => Some(0.0),
        (None, Some(0.0)) => Some(0.0),
        _ => None,
    };
    ModelEDR {
        model: model.model_id,
        epsilon,
        eta,
        product,
        kennard_bound,
        heisenberg_violated: product < kennard_bound - KENNARD_SLACK,
        epsilon_bar,
        eta_bar,
        lu_product,
        lu_heisenberg_violated: lu_product.is_some_and(|p| p < kennard_bound - KENNARD_SLACK),
    }
}

fn check_covariance(cov: &PhaseMatrix, tol: &Tolerances) -> Result<()> {
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let asym = (cov - cov.transpose()).amax();
    if asym > tol.eq_tol {
        return Err(Error::InvalidCovariance(alloc::format!("asymmetric covariance (off by {asym:e})")));
    }
    let min = min_eigenvalue(cov);
    if min < tol.psd_tol {
        return Err(Error::InvalidCovariance(alloc::format!("covariance has eigenvalue {min:e}")));
    }
    Ok(())
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &PhaseMatrix) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Moment transport `μ ↦ Sμ`, `V ↦ S V Sᵀ`.
pub fn propagate(
    model: &LinearModel,
    mean: &PhaseVector,
    cov: &PhaseMatrix,
    tol: &Tolerances,
) -> Result<(PhaseVector, PhaseMatrix)> {
    check_covariance(cov, tol)?;
    if mean.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let s = &model.symplectic;
    Ok((s * mean, s * cov * s.transpose()))
}

fn gaussian_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-d * d / (2.0 * var)).exp() / (2.0 * core::f64::consts::PI * var).sqrt()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Density of the meter reading `y(Δt)` on `grid`. For the von Neumann
/// model this is the convolution of the object and probe position
/// densities.
pub fn output_distribution(
    model: &LinearModel,
    object: &GaussianState,
    probe: &GaussianState,
    grid: &[f64],
) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let (mean, cov) = joint_moments(object, probe);
    let c = model.evolved(Y);
    let m = (c * mean)[0];
    let var = (c * cov * c.transpose())[0];
    if var <= 0.0 {
        return Err(Error::InvalidCovariance("meter reading has zero variance".into()));
    }
    Ok(grid.iter().map(|&x| gaussian_pdf(x, m, var)).collect())
}

/// Born density `|ψ(x)|²` of the object position on `grid`.
pub fn born_density(object: &GaussianState, grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let var = object.cov[0][0];
    if var <= 0.0 {
        return Err(Error::InvalidCovariance("object has zero position variance".into()));
    }
    Ok(grid.iter().map(|&x| gaussian_pdf(x, object.mean[0], var)).collect())
}

/// Position spread of the object after the measurement conditioned on the
/// meter reading: `(Var x' − Cov(x', y')²/Var y')^{1/2}`. Requires
/// `x(Δt)` and `y(Δt)` to commute so that their joint law is classical.
pub fn conditional_position_spread(model: &LinearModel, object: &GaussianState, probe: &GaussianState) -> Result<f64> {
    let a = model.evolved(X);
    let b = model.evolved(Y);
    let residual = (a * symplectic_form() * b.transpose())[0].abs();
    if residual != 0.0 {
        return Err(Error::NotCommuting { residual });
    }
    let (_, cov) = joint_moments(object, probe);
    let vx = (a * cov * a.transpose())[0];
    let vy = (b * cov * b.transpose())[0];
    let cxy = (a * cov * b.transpose())[0];
    if vy <= 0.0 {
        return Err(Error::InvalidCovariance("meter reading has zero variance".into()));
    }
    Ok((vx - cxy * cxy / vy).max(0.0).sqrt())
}
