//! Mountain-pass geometry and the two critical-level solvers.

mod nehari;
mod path;
mod ps;
mod rim;

pub use nehari::{
    nehari_descend, nehari_minimize, nehari_residual, nehari_sigma, nehari_sigma_from, NehariOutcome, NehariRun,
    NehariSettings,
};
pub use path::{mountain_pass_solve, MountainPass, PathState, SolverConfig, TraceEntry};
pub use ps::{ps_diagnostic, PsEntry, PsReport};
pub use rim::{estimate_rim, find_valley_endpoint, rim_monte_carlo, zero_crossing, RimCheck, RimConstants, Valley};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::RealField;
use crate::problem::ProblemInstance;
use crate::sampling::gaussian_bump;
use crate::spaces::{norms, NormReport};

/// Everything a full solve produces.
#[derive(Debug, Clone)]
pub struct SolutionRecord {
    pub u_star: RealField,
    pub critical_value: f64,
    pub grad_norm: f64,
    pub rim: RimConstants,
    pub nehari_value: f64,
    pub iterations: usize,
    pub tail_max: f64,
    pub converged: bool,
    pub norms: NormReport,
    pub valley: Valley,
    pub mountain_pass: MountainPass,
    pub nehari: NehariOutcome,
}

/// Rim, valley endpoint from the Gaussian bump, mountain pass, then the
/// Nehari oracle, all from one seeded stream.
pub fn solve(inst: &ProblemInstance, config: &SolverConfig) -> Result<SolutionRecord> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rim = estimate_rim(inst)?;
    let valley = find_valley_endpoint(inst, &gaussian_bump(inst.grid(), inst.dim()), rim.rho)?;
    let mp = mountain_pass_solve(inst, &valley.endpoint, config)?;
    let nehari = nehari_minimize(
        inst,
        config.restarts,
        NehariSettings {
            tol: config.tol,
            max_iter: config.max_iter,
        },
        &mut rng,
    )?;
    let norms = norms(&mp.u_star, inst)?;
    Ok(SolutionRecord {
        u_star: mp.u_star.clone(),
        critical_value: mp.critical_value,
        grad_norm: mp.grad_norm,
        rim,
        nehari_value: nehari.best.value,
        iterations: mp.iterations,
        tail_max: mp.tail_max,
        converged: mp.converged,
        norms,
        valley,
        mountain_pass: mp,
        nehari,
    })
}
