use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fracops::{derivative, marchaud_derivative, Side};
use crate::grid::{Grid, RealField};
use crate::io::config::{load_run_config, RunConfig};
use crate::io::records::{
    read_profile_csv, solution_json, write_field_csv, write_json, write_trace_csv, Diagnostics, Outputs, RunManifest,
};
use crate::mpa::{nehari_minimize, solve, NehariSettings};
use crate::problem::{build_instance, ProblemInstance};
use crate::verify::{self, Level, VerifyOptions};

/// Overrides the seed of the config or manifest when set.
pub const SEED_ENV: &str = "FRACHAMIL_SEED";

/// Relative tolerance on node spacing for CSV input grids.
const GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Failure = 1,
    InvalidInput = 2,
    NotConverged = 3,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV} must be a non-negative integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

fn prepare(config: &Path) -> Result<(RunConfig, ProblemInstance)> {
    let mut run = load_run_config(config)?;
    if let Some(seed) = env_seed()? {
        run.solver.seed = seed;
    }
    run.solver.validate()?;
    let inst = build_instance(&run.instance)?;
    Ok((run, inst))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Full solve; writes `solution.json`, `profile.csv`, `diagnostics.json`,
/// `trace.csv` and `manifest.json` into `out`.
pub fn cmd_solve(config: &Path, out: &Path) -> ExitCode {
    let started_at = now();
    let (run, inst) = match prepare(config) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::InvalidInput;
        }
    };
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return ExitCode::Failure;
    }
    let outputs = Outputs::default();
    let record = solve(&inst, &run.solver);
    let code = match &record {
        Ok(r) if r.converged => ExitCode::Success,
        _ => ExitCode::NotConverged,
    };
    let written = (|| -> Result<()> {
        if let Ok(r) = &record {
            write_json(&out.join(&outputs.solution), &solution_json(r))?;
            let names: Vec<String> = (1..=inst.dim()).map(|i| format!("u_{i}")).collect();
            write_field_csv(std::fs::File::create(out.join(&outputs.profile))?, &r.u_star, &names, &[])?;
            write_json(&out.join(&outputs.diagnostics), &Diagnostics::new(r, inst.hypotheses()))?;
            write_trace_csv(&out.join(&outputs.trace), &r.mountain_pass.trace)?;
        }
        let manifest = RunManifest {
            seed: run.solver.seed,
            run: run.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at,
            finished_at: now(),
            outputs: outputs.clone(),
            exit_code: code.code(),
        };
        write_json(&out.join("manifest.json"), &manifest)
    })();
    if let Err(e) = written {
        eprintln!("error: writing results to {}: {e}", out.display());
        return ExitCode::Failure;
    }
    match record {
        Ok(r) => {
            println!(
                "critical value {:.12} (Nehari {:.12}), grad norm {:.3e} after {} iterations, {}",
                r.critical_value,
                r.nehari_value,
                r.grad_norm,
                r.iterations,
                if r.converged { "converged" } else { "not converged" }
            );
            println!("results in {}", out.display());
        }
        Err(e) => eprintln!("error: solver failed: {e}"),
    }
    code
}

pub fn cmd_verify(level: Level, inject_branch_flip: bool) -> ExitCode {
    let seed = match env_seed() {
        Ok(s) => s.unwrap_or(42),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::InvalidInput;
        }
    };
    match verify::run(level, VerifyOptions { inject_branch_flip }, seed) {
        Ok(report) => {
            print!("{}", report.table());
            if report.failures() == 0 {
                ExitCode::Success
            } else {
                ExitCode::Failure
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::Failure
        }
    }
}

#[derive(Debug, Clone)]
pub struct DerivativeArgs {
    pub input: PathBuf,
    pub alpha: f64,
    pub side: Side,
    pub check: bool,
    pub out: Option<PathBuf>,
}

/// Grid whose nodes reproduce `t` within [`GRID_TOLERANCE`].
fn grid_from_nodes(t: &[f64]) -> Result<Grid> {
    let n = t.len();
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::Config(format!("need an even number of at least 8 rows, got {n}")));
    }
    let dt = t[1] - t[0];
    if !(dt > 0.0) {
        return Err(Error::Config("t must be increasing".into()));
    }
    let grid = Grid::new(-t[0], n)?;
    let bad = grid
        .nodes()
        .zip(t)
        .position(|(a, &b)| (a - b).abs() > GRID_TOLERANCE * dt.max(grid.spacing()) * n as f64);
    match bad {
        None if (grid.spacing() - dt).abs() <= GRID_TOLERANCE * dt => Ok(grid),
        Some(j) => Err(Error::Config(format!(
            "t is not the uniform grid t_j = -T + j·2T/N: row {} has t = {}, expected {}",
            j + 2,
            t[j],
            grid.node(j)
        ))),
        None => Err(Error::Config("t is not uniform".into())),
    }
}

pub fn cmd_derivative(args: &DerivativeArgs) -> ExitCode {
    let prepared = (|| -> Result<RealField> {
        let (t, cols) = read_profile_csv(&args.input, &["t", "u"])?;
        let grid = grid_from_nodes(&t)?;
        RealField::scalar(&grid, cols.into_iter().next().unwrap_or_default())
    })();
    let u = match prepared {
        Ok(u) => u,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::InvalidInput;
        }
    };
    let du = match derivative(&u, args.alpha, args.side) {
        Ok(d) => d,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            return ExitCode::InvalidInput;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::Failure;
        }
    };
    let mut names = vec!["du".to_string()];
    let mut extra: Vec<Vec<f64>> = Vec::new();
    if args.check {
        match marchaud_derivative(&u, args.alpha, args.side) {
            Ok(m) => {
                if let Some(w) = &m.tail_warning {
                    eprintln!("warning: {w}");
                }
                let diff = du
                    .data()
                    .iter()
                    .zip(m.field.data())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                eprintln!("max |spectral - marchaud| = {diff:e}");
                names.push("marchaud".into());
                extra.push(m.field.into_data());
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::Failure;
            }
        }
    }
    let cols: Vec<&[f64]> = extra.iter().map(|c| c.as_slice()).collect();
    let result = match &args.out {
        Some(path) => std::fs::File::create(path)
            .map_err(Error::from)
            .and_then(|f| write_field_csv(f, &du, &names, &cols)),
        None => write_field_csv(std::io::stdout().lock(), &du, &names, &cols),
    };
    match result {
        Ok(()) => ExitCode::Success,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::Failure
        }
    }
}

#[derive(Debug, Serialize)]
struct NehariSummary {
    nehari_value: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    best_restart: usize,
    restart_values: Vec<Option<f64>>,
    seed: u64,
}

/// Nehari oracle alone; prints a JSON summary.
pub fn cmd_nehari(config: &Path) -> ExitCode {
    let (run, inst) = match prepare(config) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::InvalidInput;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(run.solver.seed);
    let settings = NehariSettings {
        tol: run.solver.tol,
        max_iter: run.solver.max_iter,
    };
    match nehari_minimize(&inst, run.solver.restarts, settings, &mut rng) {
        Ok(o) => {
            let summary = NehariSummary {
                nehari_value: o.best.value,
                grad_norm: o.best.grad_norm,
                iterations: o.best.iterations,
                converged: o.best.converged,
                best_restart: o.best_restart,
                restart_values: o.restart_values,
                seed: run.solver.seed,
            };
            match serde_json::to_string_pretty(&summary) {
                Ok(s) => println!("{s}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::Failure;
                }
            }
            if summary.converged {
                ExitCode::Success
            } else {
                ExitCode::NotConverged
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::NotConverged
        }
    }
}
