//! Concrete `(L, W)` instances, their hypothesis checks and growth bounds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Hypothesis, Result};
use crate::fracops::composed_multiplier;
use crate::grid::{Grid, RealField};
use crate::par;

/// Required ratio `l(±T) / l_min` standing in for `l(t) → ∞`.
pub const COERCIVITY_RATIO: f64 = 100.0;

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

/// JSON instance description, e.g.
/// `{"alpha":0.75,"n":1,"T":40.0,"N":4096,"L":{"kind":"scalar_poly","p":1.0},"W":{"kind":"pure_power","mu":4.0,"b":"const:1.0"}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub alpha: f64,
    pub n: usize,
    #[serde(rename = "T")]
    pub half_length: f64,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub l: LConfig,
    #[serde(rename = "W")]
    pub w: WConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LConfig {
    /// `L(t) = scale·(1+t²)^p·Id`.
    ScalarPoly {
        p: f64,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        scale: f64,
    },
    /// `L(t) = diag(scale_i·(1+t²)^{p_i})`.
    Diagonal { entries: Vec<DiagonalEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalEntry {
    pub p: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WConfig {
    /// `W(t,x) = b(t)|x|^μ`, `b` given as `const:c` or `lorentzian:a`
    /// (meaning `1 + a/(1+t²)`).
    PurePower { mu: f64, b: String },
}

impl InstanceConfig {
    /// `α = 0.75`, `n = 1`, `L = 1+t²`, `W = |x|⁴` on `T = 40`, `N = 4096`.
    pub fn canonical() -> Self {
        Self {
            alpha: 0.75,
            n: 1,
            half_length: 40.0,
            points: 4096,
            l: LConfig::ScalarPoly { p: 1.0, scale: 1.0 },
            w: WConfig::PurePower {
                mu: 4.0,
                b: "const:1.0".into(),
            },
        }
    }
}

/// Bounded positive time weight of the pure-power nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Const(f64),
    /// `1 + a/(1+t²)`.
    Lorentzian(f64),
}

impl Weight {
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, value) = text
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("weight `{text}` must look like kind:value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("weight `{text}` has a non-numeric value")))?;
        if !value.is_finite() {
            return Err(Error::Config(format!("weight `{text}` is not finite")));
        }
        match kind.trim() {
            "const" => Ok(Weight::Const(value)),
            "lorentzian" => Ok(Weight::Lorentzian(value)),
            other => Err(Error::Config(format!("unknown weight kind `{other}`"))),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Weight::Const(c) => c,
            Weight::Lorentzian(a) => 1.0 + a / (1.0 + t * t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum MatrixWeight {
    Scalar { p: f64, scale: f64 },
    Diagonal,
}

/// Numerical evidence recorded while validating an instance.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    /// `min_j l(t_j)`.
    pub l_min: f64,
    /// `l(±T) / l_min`.
    pub coercivity_ratio: f64,
    /// Worst relative residual of `(x,∇W) − μW` on sampled points.
    pub superquadratic_residual: f64,
    /// `max_t |∇W(t,x)|/|x|` along `|x| = 10^{-1} … 10^{-6}`.
    pub origin_ratios: Vec<f64>,
    /// Largest `(|W| + |∇W|) / W̄` seen; at most one when the envelope holds.
    pub envelope_ratio: f64,
}

/// Validated problem: order, dimension, grid, `L` and `W`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    config: InstanceConfig,
    alpha: f64,
    dim: usize,
    grid: Grid,
    matrix: MatrixWeight,
    l_diag: Vec<f64>,
    l_min: f64,
    mu: f64,
    weight: Weight,
    b_nodes: Vec<f64>,
    b_min: f64,
    b_max: f64,
    multiplier: Vec<f64>,
    hypotheses: HypothesisReport,
}

fn hypothesis(hypothesis: Hypothesis, detail: impl Into<String>) -> Error {
    Error::Hypothesis {
        hypothesis,
        detail: detail.into(),
    }
}

/// Validates the configuration and precomputes node data.
pub fn build_instance(config: &InstanceConfig) -> Result<ProblemInstance> {
    let alpha = config.alpha;
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(hypothesis(
            Hypothesis::OrderRange,
            format!("the equation needs α in (1/2, 1), got {alpha}"),
        ));
    }
    let dim = config.n;
    if dim == 0 {
        return Err(Error::Config("dimension n must be positive".into()));
    }
    let grid = Grid::new(config.half_length, config.points)?;
    let big_t = grid.half_length();

    let WConfig::PurePower { mu, b } = &config.w;
    let mu = *mu;
    if !(mu.is_finite() && mu > 2.0) {
        return Err(hypothesis(
            Hypothesis::Superquadratic,
            format!("pure power needs μ > 2, got {mu}"),
        ));
    }
    let weight = Weight::parse(b)?;
    let b_nodes: Vec<f64> = grid.nodes().map(|t| weight.eval(t)).collect();
    let b_min = b_nodes.iter().copied().fold(f64::INFINITY, f64::min);
    let b_max = b_nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(b_min > 0.0) {
        return Err(hypothesis(
            Hypothesis::Superquadratic,
            format!("W must be positive away from 0, weight minimum is {b_min}"),
        ));
    }

    let (matrix, entries): (MatrixWeight, Vec<(f64, f64)>) = match &config.l {
        LConfig::ScalarPoly { p, scale } => (
            MatrixWeight::Scalar {
                p: *p,
                scale: *scale,
            },
            vec![(*scale, *p); dim],
        ),
        LConfig::Diagonal { entries } => {
            if entries.len() != dim {
                return Err(Error::Config(format!(
                    "diagonal L has {} entries for dimension {dim}",
                    entries.len()
                )));
            }
            (
                MatrixWeight::Diagonal,
                entries.iter().map(|e| (e.scale, e.p)).collect(),
            )
        }
    };
    for &(scale, p) in &entries {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(hypothesis(
                Hypothesis::Coercivity,
                format!("L must be positive definite, got scale {scale}"),
            ));
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(hypothesis(
                Hypothesis::Coercivity,
                format!("l(t) must grow without bound, got exponent p = {p}"),
            ));
        }
    }
    let lfun = |t: f64, c: usize| entries[c].0 * (1.0 + t * t).powf(entries[c].1);
    let mut l_diag = Vec::with_capacity(dim * grid.points());
    for c in 0..dim {
        l_diag.extend(grid.nodes().map(|t| lfun(t, c)));
    }
    let l_min = l_diag.iter().copied().fold(f64::INFINITY, f64::min);
    let l_edge = (0..dim)
        .map(|c| lfun(big_t, c).min(lfun(-big_t, c)))
        .fold(f64::INFINITY, f64::min);
    let coercivity_ratio = l_edge / l_min;
    if coercivity_ratio < COERCIVITY_RATIO {
        return Err(hypothesis(
            Hypothesis::Coercivity,
            format!(
                "l(±T)/l_min = {coercivity_ratio:.3} is below {COERCIVITY_RATIO}; widen T or raise p"
            ),
        ));
    }

    let mut inst = ProblemInstance {
        config: config.clone(),
        alpha,
        dim,
        multiplier: composed_multiplier(&grid, alpha),
        grid,
        matrix,
        l_diag,
        l_min,
        mu,
        weight,
        b_nodes,
        b_min,
        b_max,
        hypotheses: HypothesisReport {
            l_min,
            coercivity_ratio,
            superquadratic_residual: 0.0,
            origin_ratios: Vec::new(),
            envelope_ratio: 0.0,
        },
    };
    inst.hypotheses = inst.check_potential_hypotheses()?;
    Ok(inst)
}

impl ProblemInstance {
    pub fn config(&self) -> &InstanceConfig {
        &self.config
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l_min(&self) -> f64 {
        self.l_min
    }

    pub fn b_min(&self) -> f64 {
        self.b_min
    }

    pub fn b_max(&self) -> f64 {
        self.b_max
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn hypotheses(&self) -> &HypothesisReport {
        &self.hypotheses
    }

    /// Diagonal of `L(t_j)`, component-major like [`RealField`].
    pub fn l_diagonal(&self) -> &[f64] {
        &self.l_diag
    }

    /// `|w_k|^{2α}` in ascending frequency order.
    pub fn multiplier(&self) -> &[f64] {
        &self.multiplier
    }

    /// `b(t_j)` for every node.
    pub fn weight_nodes(&self) -> &[f64] {
        &self.b_nodes
    }

    /// Smallest eigenvalue of `L(t)` at an arbitrary time.
    pub fn l_eigen_min(&self, t: f64) -> f64 {
        match (&self.matrix, &self.config.l) {
            (MatrixWeight::Scalar { p, scale }, _) => scale * (1.0 + t * t).powf(*p),
            (MatrixWeight::Diagonal, LConfig::Diagonal { entries }) => entries
                .iter()
                .map(|e| e.scale * (1.0 + t * t).powf(e.p))
                .fold(f64::INFINITY, f64::min),
            _ => unreachable!("matrix weight and configuration disagree"),
        }
    }

    /// Same instance with the potential weight multiplied by `kappa`.
    pub fn with_scaled_weight(&self, kappa: f64) -> Result<ProblemInstance> {
        let mut config = self.config.clone();
        let WConfig::PurePower { mu, .. } = config.w;
        let b = match self.weight {
            Weight::Const(c) => format!("const:{}", kappa * c),
            Weight::Lorentzian(_) => {
                return Err(Error::Config(
                    "only constant weights can be rescaled".into(),
                ))
            }
        };
        config.w = WConfig::PurePower { mu, b };
        build_instance(&config)
    }

    /// Copy with `L ≡ l·Id`, bypassing the coercivity requirement.
    #[cfg(test)]
    pub(crate) fn with_constant_l(&self, l: f64) -> Self {
        let mut out = self.clone();
        out.l_diag.iter_mut().for_each(|v| *v = l);
        out.l_min = l;
        out
    }

    pub fn check_field(&self, u: &RealField) -> Result<()> {
        if u.grid() == &self.grid && u.dim() == self.dim {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `W(t,x) = b(t)|x|^μ`.
    pub fn eval_w(&self, t: f64, x: &[f64]) -> f64 {
        self.weight.eval(t) * norm(x).powf(self.mu)
    }

    /// `∇W(t,x) = μ b(t)|x|^{μ-2} x`, zero at the origin.
    pub fn eval_grad_w(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        if r == 0.0 {
            return vec![0.0; x.len()];
        }
        let s = self.mu * self.weight.eval(t) * r.powf(self.mu - 2.0);
        x.iter().map(|v| s * v).collect()
    }

    /// `dt·Σ_j W(t_j, u_j)`.
    pub fn potential(&self, u: &RealField) -> f64 {
        let n = self.grid.points();
        let mu = self.mu;
        let mut sum = 0.0;
        if self.dim == 1 {
            for (b, v) in self.b_nodes.iter().zip(u.component(0)) {
                sum += b * v.abs().powf(mu);
            }
        } else {
            for j in 0..n {
                sum += self.b_nodes[j] * u.node_norm(j).powf(mu);
            }
        }
        self.grid.spacing() * sum
    }

    /// Pointwise `∇W(t_j, u_j)` as a field.
    pub fn grad_w_field(&self, u: &RealField) -> RealField {
        let n = self.grid.points();
        let mu = self.mu;
        let mut out = RealField::zeros(&self.grid, self.dim);
        if self.dim == 1 {
            let src = u.component(0);
            for (j, o) in out.component_mut(0).iter_mut().enumerate() {
                let v = src[j];
                *o = if v == 0.0 {
                    0.0
                } else {
                    mu * self.b_nodes[j] * v.abs().powf(mu - 2.0) * v
                };
            }
        } else {
            let scale: Vec<f64> = (0..n)
                .map(|j| {
                    let r = u.node_norm(j);
                    if r == 0.0 {
                        0.0
                    } else {
                        mu * self.b_nodes[j] * r.powf(mu - 2.0)
                    }
                })
                .collect();
            for c in 0..self.dim {
                let src = u.component(c).to_vec();
                for (j, o) in out.component_mut(c).iter_mut().enumerate() {
                    *o = scale[j] * src[j];
                }
            }
        }
        out
    }

    /// Pointwise `L(t_j) u_j`.
    pub fn apply_l(&self, u: &RealField) -> RealField {
        let mut out = u.clone();
        out.data_mut()
            .iter_mut()
            .zip(&self.l_diag)
            .for_each(|(v, l)| *v *= l);
        out
    }

    /// `dt·Σ_j (L(t_j)u_j, v_j)`.
    pub fn l_form(&self, u: &RealField, v: &RealField) -> f64 {
        let s: f64 = u
            .data()
            .iter()
            .zip(v.data())
            .zip(&self.l_diag)
            .map(|((a, b), l)| a * b * l)
            .sum();
        self.grid.spacing() * s
    }

    fn check_potential_hypotheses(&self) -> Result<HypothesisReport> {
        let mu = self.mu;
        let dirs = unit_directions(self.dim);
        let radii = [1e-3, 0.1, 0.5, 1.0, 2.0, 10.0];
        let times = [-self.grid.half_length(), -1.0, 0.0, 0.5, self.grid.half_length()];

        let mut superquadratic_residual: f64 = 0.0;
        let mut envelope_ratio: f64 = 0.0;
        for &t in &times {
            for d in &dirs {
                for &r in &radii {
                    let x: Vec<f64> = d.iter().map(|v| r * v).collect();
                    let w = self.eval_w(t, &x);
                    let g = self.eval_grad_w(t, &x);
                    let xg: f64 = x.iter().zip(&g).map(|(a, b)| a * b).sum();
                    if !(w > 0.0 && mu * w <= xg * (1.0 + 1e-12)) {
                        return Err(hypothesis(
                            Hypothesis::Superquadratic,
                            format!("0 < μW ≤ (x,∇W) fails at t={t}, |x|={r}"),
                        ));
                    }
                    superquadratic_residual = superquadratic_residual.max((xg - mu * w).abs() / xg);
                    let envelope = self.b_max * (r.powf(mu) + mu * r.powf(mu - 1.0));
                    envelope_ratio = envelope_ratio.max((w.abs() + norm(&g)) / envelope);
                }
            }
        }
        if envelope_ratio > 1.0 + 1e-12 {
            return Err(hypothesis(
                Hypothesis::Envelope,
                format!("|W| + |∇W| exceeds the envelope by a factor {envelope_ratio}"),
            ));
        }

        let origin_ratios: Vec<f64> = (1..=6)
            .map(|e| {
                let r = 10f64.powi(-e);
                self.grid
                    .nodes()
                    .map(|t| {
                        dirs.iter()
                            .map(|d| {
                                let x: Vec<f64> = d.iter().map(|v| r * v).collect();
                                norm(&self.eval_grad_w(t, &x)) / r
                            })
                            .fold(0.0, f64::max)
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let decreasing = origin_ratios.windows(2).all(|p| p[1] < p[0]);
        if !decreasing || origin_ratios[5] >= origin_ratios[0] {
            return Err(hypothesis(
                Hypothesis::SmallAtOrigin,
                format!("|∇W|/|x| does not decrease towards 0: {origin_ratios:?}"),
            ));
        }

        Ok(HypothesisReport {
            l_min: self.l_min,
            coercivity_ratio: self.hypotheses.coercivity_ratio,
            superquadratic_residual,
            origin_ratios,
            envelope_ratio,
        })
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Coordinate axes, their negatives and the normalized diagonal.
fn unit_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for c in 0..dim {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; dim];
            d[c] = s;
            dirs.push(d);
        }
    }
    if dim > 1 {
        dirs.push(vec![1.0 / (dim as f64).sqrt(); dim]);
    }
    dirs
}

fn random_direction(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let r = norm(&v);
        if r > 1e-8 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Constants of the two-sided power bounds and violations found.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    /// Lower constant, valid on `|x| ≥ 1`.
    pub c1: f64,
    /// Upper constant, valid on `|x| ≤ 1`.
    pub c2: f64,
    pub samples: usize,
    pub violations: usize,
}

/// Checks `W ≥ c1|x|^μ` on `|x| ≥ 1` and `W ≤ c2|x|^μ` on `|x| ≤ 1`.
pub fn growth_check(inst: &ProblemInstance, sample_count: usize, rng: &mut impl Rng) -> GrowthReport {
    growth_check_with(inst, |t, x| inst.eval_w(t, x), sample_count, rng)
}

/// [`growth_check`] against an arbitrary potential, so that deliberately
/// broken potentials can be fed through the same check.
pub fn growth_check_with<F>(
    inst: &ProblemInstance,
    potential: F,
    sample_count: usize,
    rng: &mut impl Rng,
) -> GrowthReport
where
    F: Fn(f64, &[f64]) -> f64 + Sync + Send,
{
    let dim = inst.dim();
    let grid = inst.grid();
    // sphere extrema over every node and a spread of directions
    let mut dirs = unit_directions(dim);
    if dim > 1 {
        dirs.extend((0..64).map(|_| random_direction(dim, rng)));
    }
    let extrema = par::map_range(grid.points(), |j| {
        let t = grid.node(j);
        dirs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
            let w = potential(t, d);
            (lo.min(w), hi.max(w))
        })
    });
    let (c1, c2) = extrema
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(a, b)| (lo.min(a), hi.max(b)));

    let mu = inst.mu();
    let samples: Vec<(f64, Vec<f64>)> = (0..sample_count)
        .map(|_| {
            let j = rng.random_range(0..grid.points());
            // log-uniform radius over [1e-3, 1e3]
            let r = 10f64.powf(rng.random_range(-3.0..3.0));
            let x = random_direction(dim, rng).into_iter().map(|v| r * v).collect();
            (grid.node(j), x)
        })
        .collect();
    let bad = par::map_slice(&samples, |(t, x)| {
        let r = norm(x);
        let w = potential(*t, x);
        let slack = 1e-12 * w.abs().max(f64::MIN_POSITIVE);
        if r >= 1.0 {
            w < c1 * r.powf(mu) - slack
        } else {
            w > c2 * r.powf(mu) + slack
        }
    });
    GrowthReport {
        c1,
        c2,
        samples: sample_count,
        violations: bad.into_iter().filter(|&b| b).count(),
    }
}

/// Evidence for the small-ball consequences of the growth conditions.
#[derive(Debug, Clone, Serialize)]
pub struct SmallBallReport {
    /// `max W(t,x)/|x|²` along `|x| = 10^{-1} … 10^{-6}`.
    pub quadratic_ratios: Vec<f64>,
    pub quadratic_ratios_decreasing: bool,
    /// `d = μ·b_max` in `|∇W| ≤ d|x|` on `|x| ≤ 1`.
    pub lipschitz_constant: f64,
    pub samples: usize,
    pub lipschitz_violations: usize,
}

pub fn small_ball_check(inst: &ProblemInstance, sample_count: usize, rng: &mut impl Rng) -> SmallBallReport {
    let dirs = unit_directions(inst.dim());
    let quadratic_ratios: Vec<f64> = (1..=6)
        .map(|e| {
            let r = 10f64.powi(-e);
            inst.grid()
                .nodes()
                .flat_map(|t| {
                    dirs.iter().map(move |d| {
                        let x: Vec<f64> = d.iter().map(|v| r * v).collect();
                        (t, x)
                    })
                })
                .map(|(t, x)| inst.eval_w(t, &x) / (r * r))
                .fold(0.0, f64::max)
        })
        .collect();
    let quadratic_ratios_decreasing = quadratic_ratios.windows(2).all(|p| p[1] < p[0]);
    let d = inst.mu() * inst.b_max();
    let grid = inst.grid();
    let mut violations = 0;
    for _ in 0..sample_count {
        let t = grid.node(rng.random_range(0..grid.points()));
        let r: f64 = rng.random_range(0.0..1.0);
        let x: Vec<f64> = random_direction(inst.dim(), rng).into_iter().map(|v| r * v).collect();
        if norm(&inst.eval_grad_w(t, &x)) > d * r * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    SmallBallReport {
        quadratic_ratios,
        quadratic_ratios_decreasing,
        lipschitz_constant: d,
        samples: sample_count,
        lipschitz_violations: violations,
    }
}
