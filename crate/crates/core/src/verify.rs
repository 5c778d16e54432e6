//! Invariant battery behind `frachamil verify`.
//!
//! Each row runs one identity or inequality on seeded random data and
//! reports the worst deviation seen against its threshold.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::energy::{derivative_action, energy, energy_value, gradient};
use crate::error::Result;
use crate::fracops::{apply_symbol, derivative, marchaud_derivative, FracSymbol, Kind, Side};
use crate::grid::{forward_transform, RealField};
use crate::problem::{build_instance, growth_check, growth_check_with, InstanceConfig, LConfig, ProblemInstance};
use crate::sampling::{band_limited, random_localized};
use crate::spaces::{embedding_constant, embedding_integral, norms, riesz_gradient, x_inner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(crate::Error::Config(format!("level must be `fast` or `full`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub bound: Bound,
    pub threshold: f64,
    pub note: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerifyRow {
    fn judge(name: &str, worst: f64, bound: Bound, threshold: f64, note: String) -> Self {
        let passed = match bound {
            Bound::AtMost => worst <= threshold,
            Bound::AtLeast => worst >= threshold,
        };
        Self {
            name: name.to_string(),
            passed,
            worst,
            bound,
            threshold,
            note,
            elapsed: Duration::ZERO,
        }
    }

    fn failed(name: &str, threshold: f64, bound: Bound, err: crate::Error) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            worst: f64::INFINITY,
            bound,
            threshold,
            note: err.to_string(),
            elapsed: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.passed).count()
    }

    /// Plain-text table, one row per check.
    pub fn table(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(4).max(5);
        let mut out = format!("{:<width$}  {:<4}  {:>11}  {:>13}  note\n", "check", "ok", "worst", "threshold");
        for r in &self.rows {
            let cmp = match r.bound {
                Bound::AtMost => "≤",
                Bound::AtLeast => "≥",
            };
            out.push_str(&format!(
                "{:<width$}  {:<4}  {:>11.3e}  {} {:>11.3e}  {}\n",
                r.name,
                if r.passed { "pass" } else { "FAIL" },
                r.worst,
                cmp,
                r.threshold,
                r.note
            ));
        }
        out.push_str(&format!("{} checks, {} failed\n", self.rows.len(), self.failures()));
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Replace the left derivative symbol by one that ignores `sign(w)`.
    pub inject_branch_flip: bool,
}

fn canonical_with(scale: f64) -> Result<ProblemInstance> {
    let mut c = InstanceConfig::canonical();
    c.l = LConfig::ScalarPoly { p: 1.0, scale };
    build_instance(&c)
}

/// Runs the battery. `fast` uses fewer samples and only `α = 0.75` for the
/// quadrature cross-check.
pub fn run(level: Level, options: VerifyOptions, seed: u64) -> Result<VerifyReport> {
    let inst = canonical_with(1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = match level {
        Level::Fast => 20,
        Level::Full => 100,
    };
    let mut rows = Vec::new();
    let mut timed = |f: &mut dyn FnMut() -> VerifyRow| {
        let start = Instant::now();
        let mut row = f();
        row.elapsed = start.elapsed();
        rows.push(row);
    };

    let orders: &[f64] = match level {
        Level::Fast => &[0.75],
        Level::Full => &[0.6, 0.75, 0.9],
    };
    timed(&mut || marchaud_row(&inst, orders));
    timed(&mut || eigen_row(&inst));
    timed(&mut || seminorm_row(&inst, samples, options, &mut rng));
    timed(&mut || embedding_constant_row());
    timed(&mut || embedding_row(&inst, samples, &mut rng));
    timed(&mut || equivalence_row(samples, &mut rng));
    let growth_samples = match level {
        Level::Fast => 2_000,
        Level::Full => 10_000,
    };
    timed(&mut || growth_row(&inst, growth_samples, &mut rng));
    timed(&mut || growth_mutation_row(&inst, growth_samples, &mut rng));
    timed(&mut || riesz_row(&inst, samples.min(20), &mut rng));
    timed(&mut || gradient_row(&inst, samples.min(20), &mut rng));
    timed(&mut || ps_row(&inst, samples.min(20), &mut rng));
    Ok(VerifyReport { level, rows })
}

const MARCHAUD: &str = "spectral vs Marchaud derivative, gaussian";

fn marchaud_row(inst: &ProblemInstance, orders: &[f64]) -> VerifyRow {
    let u = RealField::from_fn(inst.grid(), |t| (-t * t).exp());
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for &alpha in orders {
        for side in [Side::Left, Side::Right] {
            let run = || -> Result<f64> {
                let s = derivative(&u, alpha, side)?;
                let m = marchaud_derivative(&u, alpha, side)?.field;
                Ok(RealField::lin_comb(1.0, &s, -1.0, &m).l2_norm() / s.l2_norm())
            };
            match run() {
                Ok(e) => worst = worst.max(e),
                Err(e) => return VerifyRow::failed(MARCHAUD, 1e-4, Bound::AtMost, e),
            }
            cases += 1;
        }
    }
    VerifyRow::judge(MARCHAUD, worst, Bound::AtMost, 1e-4, format!("relative L², {cases} cases"))
}

const EIGEN: &str = "cosine eigen-relation";

fn eigen_row(inst: &ProblemInstance) -> VerifyRow {
    let g = inst.grid();
    let alpha = inst.alpha();
    let mut worst: f64 = 0.0;
    for k in [3, 40, 400] {
        let lambda = g.frequencies()[g.mode_index(k)];
        let u = RealField::from_fn(g, |t| (lambda * t).cos());
        for (side, sign) in [(Side::Left, 1.0), (Side::Right, -1.0)] {
            let d = match derivative(&u, alpha, side) {
                Ok(d) => d,
                Err(e) => return VerifyRow::failed(EIGEN, 1e-8, Bound::AtMost, e),
            };
            let amp = lambda.powf(alpha);
            let half = 0.5 * g.half_length();
            for (j, t) in g.nodes().enumerate() {
                if t.abs() <= half {
                    let exact = amp * (lambda * t + sign * alpha * FRAC_PI_2).cos();
                    worst = worst.max((d.value(j, 0) - exact).abs());
                }
            }
        }
    }
    VerifyRow::judge(EIGEN, worst, Bound::AtMost, 1e-8, "max interior error, 3 modes, both sides".into())
}

const SEMINORM: &str = "seminorm identity ‖D^α u‖ = ‖|w|^α û‖";

/// Left derivative symbol whose phase forgets `sign(w)`.
fn flipped_branch(inst: &ProblemInstance) -> FracSymbol {
    let alpha = inst.alpha();
    let values = inst
        .grid()
        .frequencies()
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if i == 0 || w == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(w.abs().powf(alpha), alpha * FRAC_PI_2)
            }
        })
        .collect();
    FracSymbol::from_values(alpha, Side::Left, Kind::Derivative, values)
}

fn seminorm_row(inst: &ProblemInstance, samples: usize, options: VerifyOptions, rng: &mut ChaCha8Rng) -> VerifyRow {
    let symbol = if options.inject_branch_flip {
        flipped_branch(inst)
    } else {
        match FracSymbol::new(inst.grid(), inst.alpha(), Side::Left, Kind::Derivative) {
            Ok(s) => s,
            Err(e) => return VerifyRow::failed(SEMINORM, 1e-12, Bound::AtMost, e),
        }
    };
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = band_limited(inst.grid(), 1, 200, rng);
        let lhs = match apply_symbol(&u, &symbol) {
            Ok(d) => d.l2_norm(),
            Err(e) => return VerifyRow::failed(SEMINORM, 1e-12, Bound::AtMost, e),
        };
        let rhs = forward_transform(&u).weighted_energy(inst.multiplier()).sqrt();
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    let note = if options.inject_branch_flip {
        format!("{samples} fields, branch flip injected")
    } else {
        format!("{samples} fields")
    };
    VerifyRow::judge(SEMINORM, worst, Bound::AtMost, 1e-12, note)
}

const EMBED_CONST: &str = "embedding constant vs Beta identity";

fn embedding_constant_row() -> VerifyRow {
    let exact = PI.sqrt() * gamma(0.25) / gamma(0.75);
    let err = (embedding_integral(0.75) - exact).abs() / exact;
    VerifyRow::judge(EMBED_CONST, err, Bound::AtMost, 1e-8, "α = 0.75".into())
}

const EMBED: &str = "Sobolev embedding sup|u| ≤ C_α‖u‖_α";

fn embedding_row(inst: &ProblemInstance, samples: usize, rng: &mut ChaCha8Rng) -> VerifyRow {
    let c = match embedding_constant(inst.alpha()) {
        Ok(c) => c,
        Err(e) => return VerifyRow::failed(EMBED, 1.0, Bound::AtMost, e),
    };
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = band_limited(inst.grid(), 1, 64, rng);
        match norms(&u, inst) {
            Ok(r) => worst = worst.max(r.sup_norm / (c * r.norm_alpha)),
            Err(e) => return VerifyRow::failed(EMBED, 1.0, Bound::AtMost, e),
        }
    }
    VerifyRow::judge(EMBED, worst, Bound::AtMost, 1.0, format!("largest ratio, {samples} fields"))
}

const EQUIV: &str = "norm equivalence ‖u‖²_α ≤ K‖u‖²_X";

fn equivalence_row(samples: usize, rng: &mut ChaCha8Rng) -> VerifyRow {
    let mut worst: f64 = 0.0;
    for scale in [0.25, 1.0, 4.0] {
        let inst = match canonical_with(scale) {
            Ok(i) => i,
            Err(e) => return VerifyRow::failed(EQUIV, 1.0, Bound::AtMost, e),
        };
        let k = inst.l_min().max(1.0) / inst.l_min();
        for _ in 0..samples {
            let u = random_localized(inst.grid(), 1, 6.0, rng);
            match norms(&u, &inst) {
                Ok(r) => worst = worst.max(r.norm_alpha.powi(2) / (k * r.norm_x.powi(2))),
                Err(e) => return VerifyRow::failed(EQUIV, 1.0, Bound::AtMost, e),
            }
        }
    }
    VerifyRow::judge(EQUIV, worst, Bound::AtMost, 1.0, "largest ratio, l_min ∈ {0.25, 1, 4}".into())
}

const GROWTH: &str = "two-sided growth bounds";

fn growth_row(inst: &ProblemInstance, samples: usize, rng: &mut ChaCha8Rng) -> VerifyRow {
    let r = growth_check(inst, samples, rng);
    VerifyRow::judge(
        GROWTH,
        r.violations as f64,
        Bound::AtMost,
        0.0,
        format!("violations in {} samples, c1 = {}, c2 = {}", r.samples, r.c1, r.c2),
    )
}

const MUTATION: &str = "growth check flags a mutated exponent";

fn growth_mutation_row(inst: &ProblemInstance, samples: usize, rng: &mut ChaCha8Rng) -> VerifyRow {
    let weight = inst.weight();
    let mutated = |t: f64, x: &[f64]| weight.eval(t) * x.iter().map(|v| v * v).sum::<f64>().powf(1.5);
    let r = growth_check_with(inst, mutated, samples, rng);
    VerifyRow::judge(
        MUTATION,
        r.violations as f64,
        Bound::AtLeast,
        1.0,
        format!("violations in {} samples with μ′ = 3", r.samples),
    )
}

const RIESZ: &str = "Riesz solve ⟨A⁻¹r, v⟩_X = ⟨r, v⟩";

fn riesz_row(inst: &ProblemInstance, samples: usize, rng: &mut ChaCha8Rng) -> VerifyRow {
    let r = random_localized(inst.grid(), 1, 4.0, rng);
    let sol = match riesz_gradient(inst, &r) {
        Ok(s) => s,
        Err(e) => return VerifyRow::failed(RIESZ, 1e-8, Bound::AtMost, e),
    };
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let v = random_localized(inst.grid(), 1, 8.0, rng);
        match x_inner(&sol, &v, inst) {
            Ok(lhs) => {
                let rhs = r.l2_dot(&v);
                worst = worst.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
            }
            Err(e) => return VerifyRow::failed(RIESZ, 1e-8, Bound::AtMost, e),
        }
    }
    VerifyRow::judge(RIESZ, worst, Bound::AtMost, 1e-8, format!("{samples} test fields"))
}

const GRADIENT: &str = "gradient vs central differences";

/// Worst relative error of `⟨∇I(u), v⟩_X` against central differences at
/// each step size in `steps`.
pub fn gradient_fd_errors(inst: &ProblemInstance, pairs: usize, steps: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let mut worst = vec![0.0f64; steps.len()];
    for _ in 0..pairs {
        let u = random_localized(inst.grid(), inst.dim(), 3.0, rng);
        let v = random_localized(inst.grid(), inst.dim(), 3.0, rng);
        let g = gradient(inst, &u)?;
        let exact = x_inner(&g, &v, inst)?;
        let scale = x_inner(&u, &v, inst)?.abs() + inst.grad_w_field(&u).l2_dot(&v).abs();
        debug_assert!((derivative_action(inst, &u, &v)? - exact).abs() <= 1e-6 * scale);
        for (w, &h) in worst.iter_mut().zip(steps) {
            let plus = energy_value(inst, &RealField::lin_comb(1.0, &u, h, &v))?;
            let minus = energy_value(inst, &RealField::lin_comb(1.0, &u, -h, &v))?;
            let fd = (plus - minus) / (2.0 * h);
            *w = w.max((fd - exact).abs() / scale.max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

fn gradient_row(inst: &ProblemInstance, pairs: usize, rng: &mut ChaCha8Rng) -> VerifyRow {
    let steps = [1e-4, 1e-5, 1e-6];
    match gradient_fd_errors(inst, pairs, &steps, rng) {
        Ok(errs) => {
            let worst = errs.iter().cloned().fold(0.0, f64::max);
            let note = format!(
                "{pairs} pairs, h = 1e-4/1e-5/1e-6: {:.1e} / {:.1e} / {:.1e}",
                errs[0], errs[1], errs[2]
            );
            VerifyRow::judge(GRADIENT, worst, Bound::AtMost, 1e-6, note)
        }
        Err(e) => VerifyRow::failed(GRADIENT, 1e-6, Bound::AtMost, e),
    }
}

const PS: &str = "PS identity I − I′(u)u/μ = (½ − 1/μ)‖u‖²_X";

fn ps_row(inst: &ProblemInstance, samples: usize, rng: &mut ChaCha8Rng) -> VerifyRow {
    let coeff = 0.5 - 1.0 / inst.mu();
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let u = random_localized(inst.grid(), 1, 3.0, rng).scaled(0.25 + 0.25 * i as f64);
        match energy(inst, &u) {
            Ok(r) => {
                let expect = coeff * 2.0 * r.quadratic;
                worst = worst.max((r.ps_value - expect).abs() / expect);
            }
            Err(e) => return VerifyRow::failed(PS, 1e-10, Bound::AtMost, e),
        }
    }
    VerifyRow::judge(PS, worst, Bound::AtMost, 1e-10, format!("{samples} fields"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_battery_passes() {
        let report = run(Level::Fast, VerifyOptions::default(), 7).unwrap();
        assert_eq!(report.failures(), 0, "\n{}", report.table());
        assert_eq!(report.rows.len(), 11);
    }

    #[test]
    fn branch_flip_breaks_the_seminorm_row() {
        let inst = canonical_with(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let row = seminorm_row(&inst, 3, VerifyOptions { inject_branch_flip: true }, &mut rng);
        assert!(!row.passed);
        let row = seminorm_row(&inst, 3, VerifyOptions::default(), &mut rng);
        assert!(row.passed, "{}", row.worst);
    }

    #[test]
    fn level_parses() {
        assert_eq!("fast".parse::<Level>().unwrap(), Level::Fast);
        assert!("slow".parse::<Level>().is_err());
    }
}
