//! Norms of `H^α` and the weighted space `X^α`, the Sobolev embedding
//! constant and the Riesz solve `A g = r` with `A = |w|^{2α} + L(t)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cg;
use crate::error::{Error, Result};
use crate::fracops::apply_real_multiplier;
use crate::grid::{forward_transform, RealField, SpectralField};
use crate::problem::ProblemInstance;
use crate::special::integrate;

pub const CG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub l2: f64,
    pub seminorm_alpha: f64,
    pub norm_alpha: f64,
    #[serde(rename = "norm_X")]
    pub norm_x: f64,
    pub sup_norm: f64,
}

/// `|u|_α² = (1/2T)·Σ_k |w_k|^{2α}|û_k|²`.
pub fn seminorm_sq(u: &RealField, inst: &ProblemInstance) -> Result<f64> {
    inst.check_field(u)?;
    Ok(forward_transform(u).weighted_energy(inst.multiplier()))
}

pub fn norms(u: &RealField, inst: &ProblemInstance) -> Result<NormReport> {
    let semi = seminorm_sq(u, inst)?;
    let l2 = u.l2_norm();
    let x = semi + inst.l_form(u, u);
    Ok(NormReport {
        l2,
        seminorm_alpha: semi.sqrt(),
        norm_alpha: (l2 * l2 + semi).sqrt(),
        norm_x: x.sqrt(),
        sup_norm: u.sup_norm(),
    })
}

/// `⟨u, v⟩_X = (1/2T)·Σ |w|^{2α} Re(û conj v̂) + dt·Σ (L u, v)`.
pub fn x_inner(u: &RealField, v: &RealField, inst: &ProblemInstance) -> Result<f64> {
    inst.check_field(u)?;
    inst.check_field(v)?;
    let su = forward_transform(u);
    let sv = forward_transform(v);
    Ok(su.weighted_dot(&sv, inst.multiplier()) + inst.l_form(u, v))
}

pub fn x_norm_sq(u: &RealField, inst: &ProblemInstance) -> Result<f64> {
    Ok(seminorm_sq(u, inst)? + inst.l_form(u, u))
}

pub fn x_norm(u: &RealField, inst: &ProblemInstance) -> Result<f64> {
    Ok(x_norm_sq(u, inst)?.sqrt())
}

/// Spectral coefficients together with the `X^α` data needed to form inner
/// products with other prepared fields without further transforms.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub field: RealField,
    pub spectrum: SpectralField,
}

impl Prepared {
    pub fn new(field: RealField) -> Self {
        let spectrum = forward_transform(&field);
        Self { field, spectrum }
    }

    pub fn inner(&self, other: &Prepared, inst: &ProblemInstance) -> f64 {
        self.spectrum.weighted_dot(&other.spectrum, inst.multiplier()) + inst.l_form(&self.field, &other.field)
    }
}

/// `A u` with `A = compose_right_left(·, α) + L(t)`.
pub fn apply_operator(u: &RealField, inst: &ProblemInstance) -> Result<RealField> {
    inst.check_field(u)?;
    let mut out = apply_real_multiplier(u, inst.multiplier())?;
    out.data_mut()
        .iter_mut()
        .zip(u.data().iter().zip(inst.l_diagonal()))
        .for_each(|(o, (v, l))| *o += l * v);
    Ok(out)
}

/// Iteration cap `10·√N` of the Riesz solve.
pub fn cg_iteration_cap(inst: &ProblemInstance) -> usize {
    (10.0 * (inst.grid().points() as f64).sqrt()).ceil() as usize
}

/// Riesz representative of `v ↦ dt·Σ (residual_j, v_j)` in `X^α`.
pub fn riesz_gradient(inst: &ProblemInstance, residual: &RealField) -> Result<RealField> {
    Ok(riesz_solve(inst, residual, None)?.solution)
}

/// [`riesz_gradient`] with an optional warm start, reporting CG statistics.
pub fn riesz_solve(
    inst: &ProblemInstance,
    residual: &RealField,
    guess: Option<&RealField>,
) -> Result<cg::CgOutcome> {
    inst.check_field(residual)?;
    let precond: Vec<f64> = inst
        .multiplier()
        .iter()
        .map(|m| 1.0 / (m + inst.l_min()))
        .collect();
    cg::solve(
        |u| apply_operator(u, inst),
        |r| apply_real_multiplier(r, &precond),
        residual,
        guess,
        CG_TOLERANCE,
        cg_iteration_cap(inst),
    )
}

/// `C_α = ((1/2π)·∫(1+w²)^{-α} dw)^{1/2}`, so that
/// `sup|u| ≤ C_α·‖u‖_α` in this crate's transform normalization.
pub fn embedding_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::Config(format!(
            "embedding constant needs α in (1/2, 1], got {alpha}; the integral diverges at α ≤ 1/2"
        )));
    }
    Ok((embedding_integral(alpha) / (2.0 * PI)).sqrt())
}

/// `∫_ℝ (1+w²)^{-α} dw`, the tail `[1, ∞)` mapped to `[0, 1]` by
/// `w = y^{-p}` with `p = 1/(2α-1)`, which makes the integrand bounded.
pub fn embedding_integral(alpha: f64) -> f64 {
    let p = 1.0 / (2.0 * alpha - 1.0);
    let head = integrate(|w| (1.0 + w * w).powf(-alpha), 0.0, 1.0, 1e-13);
    let tail = integrate(|y| p * (1.0 + y.powf(2.0 * p)).powf(-alpha), 0.0, 1.0, 1e-13);
    2.0 * (head + tail)
}
