//! Liouville–Weyl fractional derivatives and integrals on the whole line.
//!
//! The spectral path applies `(±iw)^{±α}` as diagonal multipliers; the
//! [`marchaud`] submodule evaluates the same derivatives by direct quadrature
//! of the difference-quotient integral and serves as an independent cross-check.

pub mod marchaud;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, Grid, RealField};

pub use marchaud::{left_derivative_marchaud, marchaud_derivative, MarchaudResult};

/// Relative size of the mean a fractional integral tolerates.
pub const ZERO_MEAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Integrates from `-∞`; symbol `(iw)^α`.
    Left,
    /// Integrates towards `+∞`; symbol `(-iw)^α`.
    Right,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::Config(format!(
                "side must be `left` or `right`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Derivative,
    Integral,
}

/// Fourier multiplier of a fractional operator sampled on a grid lattice.
#[derive(Debug, Clone)]
pub struct FracSymbol {
    pub order: f64,
    pub side: Side,
    pub kind: Kind,
    values: Vec<Complex64>,
}

pub(crate) fn check_order(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "fractional order must lie in (0,1), got {alpha}"
        )))
    }
}

impl FracSymbol {
    /// Principal branch `|w|^α·e^{±iαπ·sign(w)/2}`; zero mode and the unpaired
    /// mode `-N/2` map to 0.
    pub fn new(grid: &Grid, order: f64, side: Side, kind: Kind) -> Result<Self> {
        check_order(order)?;
        let orientation = match side {
            Side::Left => 1.0,
            Side::Right => -1.0,
        };
        let exponent = match kind {
            Kind::Derivative => order,
            Kind::Integral => -order,
        };
        let values = grid
            .frequencies()
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                if i == 0 || w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let phase = exponent * FRAC_PI_2 * w.signum() * orientation;
                Complex64::from_polar(w.abs().powf(exponent), phase)
            })
            .collect();
        Ok(Self {
            order,
            side,
            kind,
            values,
        })
    }

    /// Symbol with caller-supplied values, used to probe the checks with
    /// deliberately wrong branches.
    pub fn from_values(order: f64, side: Side, kind: Kind, values: Vec<Complex64>) -> Self {
        Self {
            order,
            side,
            kind,
            values,
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// `inverse(symbol·forward(u))`.
pub fn apply_symbol(u: &RealField, symbol: &FracSymbol) -> Result<RealField> {
    if symbol.values.len() != u.grid().points() {
        return Err(Error::GridMismatch);
    }
    let mut s = forward_transform(u);
    s.apply_multiplier(&symbol.values);
    inverse_transform(&s)
}

pub fn left_derivative(u: &RealField, alpha: f64) -> Result<RealField> {
    let symbol = FracSymbol::new(u.grid(), alpha, Side::Left, Kind::Derivative)?;
    apply_symbol(u, &symbol)
}

pub fn right_derivative(u: &RealField, alpha: f64) -> Result<RealField> {
    let symbol = FracSymbol::new(u.grid(), alpha, Side::Right, Kind::Derivative)?;
    apply_symbol(u, &symbol)
}

pub fn derivative(u: &RealField, alpha: f64, side: Side) -> Result<RealField> {
    match side {
        Side::Left => left_derivative(u, alpha),
        Side::Right => right_derivative(u, alpha),
    }
}

/// Liouville–Weyl integral of a zero-mean field.
pub fn liouville_weyl_integral(u: &RealField, alpha: f64, side: Side) -> Result<RealField> {
    let symbol = FracSymbol::new(u.grid(), alpha, side, Kind::Integral)?;
    let scale = u.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for mean in u.means() {
        if mean.abs() > ZERO_MEAN_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonZeroMean { mean });
        }
    }
    apply_symbol(u, &symbol)
}

/// `|w|^{2α}` on the lattice with the unpaired mode zeroed.
pub fn composed_multiplier(grid: &Grid, alpha: f64) -> Vec<f64> {
    grid.frequencies()
        .iter()
        .enumerate()
        .map(|(i, &w)| if i == 0 { 0.0 } else { w.abs().powf(2.0 * alpha) })
        .collect()
}

/// Right derivative of the left derivative, applied as the single real
/// multiplier `|w|^{2α}`.
pub fn compose_right_left(u: &RealField, alpha: f64) -> Result<RealField> {
    check_order(alpha)?;
    apply_real_multiplier(u, &composed_multiplier(u.grid(), alpha))
}

pub(crate) fn apply_real_multiplier(u: &RealField, multiplier: &[f64]) -> Result<RealField> {
    let mut s = forward_transform(u);
    s.apply_real_multiplier(multiplier);
    inverse_transform(&s)
}
