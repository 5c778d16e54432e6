//! The rim `‖u‖_X = ρ` on which `I ≥ β > 0`, and the valley endpoint `e`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{energy_value, EnergyParts};
use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::par;
use crate::problem::ProblemInstance;
use crate::sampling::random_localized;
use crate::spaces::{embedding_constant, x_norm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RimConstants {
    pub rho: f64,
    pub beta: f64,
    /// `‖u‖_{L²} ≤ C0·‖u‖_X`.
    #[serde(rename = "C0")]
    pub c0: f64,
    /// `sup|u| ≤ C_alpha·‖u‖_X`.
    #[serde(rename = "C_alpha")]
    pub c_alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
}

/// Rim constants of a pure-power instance.
///
/// `C_alpha` is the `H^α` embedding constant times `√K`,
/// `K = max(l_min, 1)/l_min`, which turns it into an `X^α` bound. On the rim
/// `|u| ≤ δ`, so `∫W ≤ ε‖u‖²_{L²} ≤ εC0²ρ²` and `I ≥ (½ − εC0²)ρ² = ρ²/4`.
pub fn estimate_rim(inst: &ProblemInstance) -> Result<RimConstants> {
    let l_min = inst.l_min();
    let c0 = 1.0 / l_min.sqrt();
    let k = l_min.max(1.0) / l_min;
    let c_alpha = embedding_constant(inst.alpha())? * k.sqrt();
    let epsilon = 1.0 / (4.0 * c0 * c0);
    let delta = (epsilon / inst.b_max()).powf(1.0 / (inst.mu() - 2.0));
    let rho = delta / c_alpha;
    let beta = (0.5 - epsilon * c0 * c0) * rho * rho;
    Ok(RimConstants {
        rho,
        beta,
        c0,
        c_alpha,
        delta,
        epsilon,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RimCheck {
    pub samples: usize,
    pub violations: usize,
    /// Smallest `I(u)/β` over the samples.
    pub min_ratio: f64,
}

/// Evaluates `I` on random fields scaled onto the rim.
pub fn rim_monte_carlo(inst: &ProblemInstance, rim: &RimConstants, samples: usize, rng: &mut impl Rng) -> Result<RimCheck> {
    let seeds: Vec<u64> = (0..samples).map(|_| rng.random()).collect();
    let values = par::map_slice(&seeds, |&seed| -> Result<f64> {
        let mut local = ChaCha8Rng::seed_from_u64(seed);
        let width = local.random_range(0.5..8.0);
        let u = random_localized(inst.grid(), inst.dim(), width, &mut local);
        let n = x_norm(&u, inst)?;
        energy_value(inst, &u.scaled(rim.rho / n))
    });
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    for v in values {
        let ratio = v? / rim.beta;
        min_ratio = min_ratio.min(ratio);
        if ratio < 1.0 - 1e-6 {
            violations += 1;
        }
    }
    Ok(RimCheck {
        samples,
        violations,
        min_ratio,
    })
}

#[derive(Debug, Clone)]
pub struct Valley {
    pub endpoint: RealField,
    pub sigma: f64,
    pub energy: f64,
    pub norm_x: f64,
}

pub const MAX_DOUBLINGS: usize = 60;

/// Doubles `σ` from 1 until `I(σd) ≤ −1` and `‖σd‖_X > ρ`.
pub fn find_valley_endpoint(inst: &ProblemInstance, direction: &RealField, rho: f64) -> Result<Valley> {
    inst.check_field(direction)?;
    let n = x_norm(direction, inst)?;
    if !(n > 0.0) {
        return Err(Error::Degenerate("valley direction is zero".into()));
    }
    let d = direction.scaled(1.0 / n);
    let mut sigma = 1.0;
    for _ in 0..=MAX_DOUBLINGS {
        let e = d.scaled(sigma);
        let value = energy_value(inst, &e)?;
        if value <= -1.0 && sigma > rho {
            return Ok(Valley {
                endpoint: e,
                sigma,
                energy: value,
                norm_x: sigma,
            });
        }
        sigma *= 2.0;
    }
    Err(Error::Degenerate(format!(
        "I(σd) stayed above -1 after {MAX_DOUBLINGS} doublings"
    )))
}

/// Smallest `σ` with `I(σd) ≤ 0` for a unit direction, from the parts of `I(d)`.
pub fn zero_crossing(parts: &EnergyParts, mu: f64) -> f64 {
    (parts.quadratic / parts.potential).powf(1.0 / (mu - 2.0))
}
