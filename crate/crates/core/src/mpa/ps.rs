//! Palais–Smale bookkeeping along solver iterates.

use serde::Serialize;

use crate::energy::{derivative_action, energy_parts};
use crate::error::Result;
use crate::grid::RealField;
use crate::problem::ProblemInstance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsEntry {
    /// `I(u) − (1/μ)·I′(u)u`.
    pub ps_value: f64,
    /// `‖u‖²_X ≤ ps_value / (½ − 1/μ)`.
    pub norm_sq_bound: f64,
    pub norm_sq: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PsReport {
    pub entries: Vec<PsEntry>,
    /// Set when some iterate exceeds its implied norm bound.
    pub unbounded: bool,
}

pub fn ps_diagnostic(inst: &ProblemInstance, iterates: &[RealField]) -> Result<PsReport> {
    let coeff = 0.5 - 1.0 / inst.mu();
    let mut entries = Vec::with_capacity(iterates.len());
    for u in iterates {
        let parts = energy_parts(inst, u)?;
        let action = derivative_action(inst, u, u)?;
        let ps_value = parts.value() - action / inst.mu();
        entries.push(PsEntry {
            ps_value,
            norm_sq_bound: ps_value / coeff,
            norm_sq: 2.0 * parts.quadratic,
        });
    }
    let unbounded = entries
        .iter()
        .any(|e| e.norm_sq > e.norm_sq_bound * (1.0 + 1e-9) + 1e-300);
    Ok(PsReport { entries, unbounded })
}
