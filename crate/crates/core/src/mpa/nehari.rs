//! Ground-state level by minimizing `J(v) = max_σ I(σv)` over unit directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{energy_parts, gradient_solve};
use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::par;
use crate::problem::ProblemInstance;
use crate::sampling::{gaussian_bump, random_bumps};
use crate::spaces::{x_inner, x_norm, x_norm_sq};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// `σ* = (S/(μQ))^{1/(μ-2)}`, the maximizer of `σ ↦ I(σu)`.
pub fn nehari_sigma(inst: &ProblemInstance, u: &RealField) -> Result<f64> {
    let s = x_norm_sq(u, inst)?;
    let q = inst.potential(u);
    nehari_sigma_from(s, q, inst.mu())
}

pub fn nehari_sigma_from(s: f64, q: f64, mu: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::Degenerate("Nehari scaling needs a nonzero field".into()));
    }
    Ok((s / (mu * q)).powf(1.0 / (mu - 2.0)))
}

#[derive(Debug, Clone)]
pub struct NehariRun {
    pub value: f64,
    /// Point `σ*v` on the Nehari manifold.
    pub point: RealField,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct NehariOutcome {
    pub best: NehariRun,
    pub best_restart: usize,
    /// Level reached by each restart, in order; `None` when it failed.
    pub restart_values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NehariSettings {
    pub tol: f64,
    pub max_iter: usize,
}

/// Projected steepest descent of `J` from one start direction.
pub fn nehari_descend(inst: &ProblemInstance, start: &RealField, settings: NehariSettings) -> Result<NehariRun> {
    let n0 = x_norm(start, inst)?;
    if !(n0 > 0.0) {
        return Err(Error::Degenerate("start direction is zero".into()));
    }
    let mut v = start.scaled(1.0 / n0);
    let mut warm: Option<RealField> = None;
    let mut tau_prev: Option<f64> = None;
    let mut iterations = 0;
    loop {
        let sigma = nehari_sigma(inst, &v)?;
        let u = v.scaled(sigma);
        let value = energy_parts(inst, &u)?.value();
        let solve = gradient_solve(inst, &u, warm.as_ref())?;
        let g = solve.gradient;
        warm = Some(solve.riesz);
        let gnorm = x_norm(&g, inst)?;
        // ‖u‖_X = σ on the unit sphere
        if gnorm <= settings.tol * sigma.max(1.0) || iterations >= settings.max_iter {
            return Ok(NehariRun {
                value,
                point: u,
                grad_norm: gnorm,
                iterations,
                converged: gnorm <= settings.tol * sigma.max(1.0),
            });
        }
        // ∇J(v) = σ·g(σv), tangent to the sphere because I′(σv)v = 0
        let slope = sigma * sigma * gnorm * gnorm;
        let mut tau = match tau_prev {
            Some(t) => 2.0 * t,
            None => 1.0 / (sigma * sigma),
        };
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = RealField::lin_comb(1.0, &v, -tau * sigma, &g);
            let nt = x_norm(&trial, inst)?;
            let trial = trial.scaled(1.0 / nt);
            let st = nehari_sigma(inst, &trial)?;
            let jt = energy_parts(inst, &trial.scaled(st))?.value();
            if jt <= value - ARMIJO * tau * slope {
                accepted = Some(trial);
                break;
            }
            tau *= 0.5;
        }
        match accepted {
            Some(next) => {
                v = next;
                tau_prev = Some(tau);
            }
            None => {
                return Err(Error::LineSearch(format!(
                    "Nehari descent stalled at J = {value} with gradient norm {gnorm:e}"
                )))
            }
        }
        iterations += 1;
    }
}

/// Best of `restarts` descents: the Gaussian bump first, then seeded random
/// bumps. Restarts run concurrently and are compared in order.
pub fn nehari_minimize(
    inst: &ProblemInstance,
    restarts: usize,
    settings: NehariSettings,
    rng: &mut impl Rng,
) -> Result<NehariOutcome> {
    let restarts = restarts.max(1);
    let seeds: Vec<u64> = (0..restarts).map(|_| rng.random()).collect();
    let runs = par::map_range(restarts, |i| {
        let start = if i == 0 {
            gaussian_bump(inst.grid(), inst.dim())
        } else {
            random_bumps(inst.grid(), inst.dim(), &mut ChaCha8Rng::seed_from_u64(seeds[i]))
        };
        nehari_descend(inst, &start, settings)
    });
    let mut best: Option<(usize, NehariRun)> = None;
    let mut restart_values = Vec::with_capacity(restarts);
    let mut last_error = None;
    for (i, run) in runs.into_iter().enumerate() {
        match run {
            Ok(run) => {
                restart_values.push(Some(run.value));
                let better = match &best {
                    None => true,
                    Some((_, b)) => (run.converged && !b.converged) || (run.converged == b.converged && run.value < b.value),
                };
                if better {
                    best = Some((i, run));
                }
            }
            Err(e) => {
                restart_values.push(None);
                last_error = Some(e);
            }
        }
    }
    match best {
        Some((best_restart, best)) => Ok(NehariOutcome {
            best,
            best_restart,
            restart_values,
        }),
        None => Err(last_error.unwrap_or_else(|| Error::LineSearch("no restart ran".into()))),
    }
}

/// `I′(σ*u)(σ*u)`, zero on the Nehari manifold.
pub fn nehari_residual(inst: &ProblemInstance, u: &RealField) -> Result<f64> {
    let sigma = nehari_sigma(inst, u)?;
    let w = u.scaled(sigma);
    Ok(x_inner(&w, &w, inst)? - inst.grad_w_field(&w).l2_dot(&w))
}
