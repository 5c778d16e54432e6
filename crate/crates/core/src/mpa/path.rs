//! Discrete mountain-pass path with peak pulling.
//!
//! Nodes `γ_0 = 0, …, γ_P = e` carry both physical values and spectra, so
//! energies, `X^α` distances and re-interpolation need no transforms. Each
//! iteration locates the highest node, moves it to the maximum of `I` along
//! its two adjacent segments, tests the gradient there, takes an Armijo step
//! along `−∇_X I`, and re-spaces both halves of the path by `X^α` arc length
//! with the peak held in place.

use serde::{Deserialize, Serialize};

use crate::energy::gradient_solve;
use crate::error::{Error, Result};
use crate::grid::{forward_transform, RealField, SpectralField};
use crate::par;
use crate::problem::ProblemInstance;

const TIE_TOLERANCE: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const TAIL_FRACTION: f64 = 0.8;

fn default_path_points() -> usize {
    30
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    5000
}
fn default_restarts() -> usize {
    5
}
fn default_seed() -> u64 {
    42
}

/// `{"path_points":30,"tol":1e-6,"max_iter":5000,"restarts":5,"seed":42}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_path_points")]
    pub path_points: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            path_points: default_path_points(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            restarts: default_restarts(),
            seed: default_seed(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.path_points < 2 {
            return Err(Error::Config("path_points must be at least 2".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Path node with its spectrum and cached `X^α` data.
#[derive(Debug, Clone)]
struct Node {
    field: RealField,
    spectrum: SpectralField,
}

impl Node {
    fn new(field: RealField) -> Self {
        let spectrum = forward_transform(&field);
        Self { field, spectrum }
    }

    fn combine(a: f64, x: &Node, b: f64, y: &Node) -> Node {
        let field = RealField::lin_comb(a, &x.field, b, &y.field);
        let mut spectrum = x.spectrum.clone();
        spectrum
            .coeffs_mut()
            .iter_mut()
            .zip(y.spectrum.coeffs())
            .for_each(|(s, t)| *s = *s * a + *t * b);
        Node { field, spectrum }
    }

    fn inner(&self, other: &Node, inst: &ProblemInstance) -> f64 {
        self.spectrum.weighted_dot(&other.spectrum, inst.multiplier()) + inst.l_form(&self.field, &other.field)
    }

    fn energy(&self, inst: &ProblemInstance) -> f64 {
        0.5 * self.inner(self, inst) - inst.potential(&self.field)
    }
}

/// Snapshot of the path.
#[derive(Debug, Clone)]
pub struct PathState {
    pub points: Vec<RealField>,
    pub energies: Vec<f64>,
    pub max_index: usize,
    pub grad_norm_at_max: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceEntry {
    /// `I` at the refined peak, before the descent step.
    pub peak_energy: f64,
    pub grad_norm: f64,
    pub peak_norm_x: f64,
    pub ps_value: f64,
    pub max_index: usize,
    pub cg_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct MountainPass {
    pub u_star: RealField,
    pub critical_value: f64,
    pub grad_norm: f64,
    pub norm_x: f64,
    pub iterations: usize,
    pub converged: bool,
    pub tail_max: f64,
    pub path: PathState,
    pub trace: Vec<TraceEntry>,
    /// Whether `γ_0 = 0` and `γ_P = e` held bit-for-bit after every update.
    pub endpoints_fixed: bool,
    /// Largest rise of the refined peak energy between consecutive
    /// iterations; re-spacing and refinement redraw the path, so this may be
    /// positive early on.
    pub max_peak_increase: f64,
    /// Largest `I(peak after step) − I(peak before step)`; negative when
    /// every Armijo step lowered the peak.
    pub max_step_increase: f64,
}

/// Runs the path algorithm from the straight segment `[0, e]`.
pub fn mountain_pass_solve(inst: &ProblemInstance, endpoint: &RealField, config: &SolverConfig) -> Result<MountainPass> {
    config.validate()?;
    inst.check_field(endpoint)?;
    let p = config.path_points;
    let e = Node::new(endpoint.clone());
    let zero = Node::new(RealField::zeros(inst.grid(), inst.dim()));
    let mut nodes: Vec<Node> = (0..=p)
        .map(|i| Node::combine(i as f64 / p as f64, &e, 0.0, &zero))
        .collect();
    nodes[0] = zero.clone();
    nodes[p] = e.clone();

    let mut trace = Vec::new();
    let mut warm: Option<RealField> = None;
    let mut tau_prev: Option<f64> = None;
    let mut endpoints_fixed = true;
    let mut max_peak_increase: f64 = 0.0;
    let mut max_step_increase = f64::NEG_INFINITY;
    let mut previous_peak = f64::INFINITY;

    let mut peak = locate(inst, &mut nodes)?;
    let mut iteration = 0;
    loop {
        let i = peak.index;
        let peak_energy = peak.energy;
        let node = &nodes[i];
        let norm_sq = node.inner(node, inst);
        let peak_norm = norm_sq.max(0.0).sqrt();
        let solve = gradient_solve(inst, &node.field, warm.as_ref())?;
        let g = Node::new(solve.gradient);
        warm = Some(solve.riesz);
        let gnorm = g.inner(&g, inst).max(0.0).sqrt();
        let action_uu = norm_sq - inst.grad_w_field(&node.field).l2_dot(&node.field);
        trace.push(TraceEntry {
            peak_energy,
            grad_norm: gnorm,
            peak_norm_x: peak_norm,
            ps_value: peak_energy - action_uu / inst.mu(),
            max_index: i,
            cg_iterations: solve.cg_iterations,
        });
        if previous_peak.is_finite() {
            max_peak_increase = max_peak_increase.max(peak_energy - previous_peak);
        }
        previous_peak = peak_energy;

        let converged = gnorm <= config.tol * peak_norm.max(1.0);
        if converged || iteration >= config.max_iter {
            let u_star = nodes[i].field.clone();
            let tail_max = u_star.tail_max(TAIL_FRACTION);
            return Ok(MountainPass {
                critical_value: peak_energy,
                grad_norm: gnorm,
                norm_x: peak_norm,
                iterations: iteration,
                converged,
                tail_max,
                path: PathState {
                    points: nodes.into_iter().map(|n| n.field).collect(),
                    energies: peak.energies,
                    max_index: i,
                    grad_norm_at_max: gnorm,
                },
                u_star,
                trace,
                endpoints_fixed,
                max_peak_increase,
                max_step_increase,
            });
        }

        // Armijo step on the peak along −∇_X I
        let mut tau = tau_prev.map_or(1.0, |t: f64| (2.0 * t).min(1.0));
        let mut stepped = None;
        for _ in 0..MAX_HALVINGS {
            let trial = Node::combine(1.0, &nodes[i], -tau, &g);
            let value = trial.energy(inst);
            if value <= peak_energy - ARMIJO * tau * gnorm * gnorm {
                stepped = Some((trial, value));
                break;
            }
            tau *= 0.5;
        }
        let Some((next, stepped_energy)) = stepped else {
            return Err(Error::LineSearch(format!(
                "peak step failed at I = {peak_energy} with gradient norm {gnorm:e}"
            )));
        };
        max_step_increase = max_step_increase.max(stepped_energy - peak_energy);
        tau_prev = Some(tau);
        nodes[i] = next;
        respace(inst, &mut nodes, i);
        endpoints_fixed &= nodes[0].field.data().iter().all(|&v| v == 0.0) && nodes[p].field == e.field;
        peak = locate(inst, &mut nodes)?;
        iteration += 1;
    }
}

struct Peak {
    index: usize,
    energy: f64,
    energies: Vec<f64>,
}

/// Finds the highest node (lowest index on ties) and moves it to the
/// maximum of `I` along its two adjacent segments.
fn locate(inst: &ProblemInstance, nodes: &mut [Node]) -> Result<Peak> {
    let p = nodes.len() - 1;
    let mut energies = par::map_slice(nodes, |n| n.energy(inst));
    let top = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let index = energies
        .iter()
        .position(|&v| v >= top - TIE_TOLERANCE)
        .expect("path has nodes");
    if index == 0 || index == p {
        return Err(Error::Degenerate(format!(
            "path maximum sits at endpoint {index}; the endpoint is not in the valley"
        )));
    }
    let sides = [
        segment_max(inst, &nodes[index], &nodes[index - 1]).map(|(s, v)| (index - 1, s, v)),
        segment_max(inst, &nodes[index], &nodes[index + 1]).map(|(s, v)| (index + 1, s, v)),
    ];
    let best = sides
        .into_iter()
        .flatten()
        .filter(|&(_, _, v)| v > energies[index])
        .fold(None, |acc: Option<(usize, f64, f64)>, c| match acc {
            Some(a) if a.2 >= c.2 => Some(a),
            _ => Some(c),
        });
    if let Some((other, s, value)) = best {
        nodes[index] = Node::combine(1.0 - s, &nodes[index], s, &nodes[other]);
        energies[index] = value;
    }
    Ok(Peak {
        index,
        energy: energies[index],
        energies,
    })
}

/// Interior maximum of `I` on the segment from `a` to `b`, as `(s, I)`.
fn segment_max(inst: &ProblemInstance, a: &Node, b: &Node) -> Option<(f64, f64)> {
    let d = Node::combine(1.0, b, -1.0, a);
    let seg = Segment::new(inst, a, &d);
    seg.interior_max().map(|s| (s, seg.energy(s)))
}

/// `I` restricted to `a + s·d` through precomputed inner products.
struct Segment<'a> {
    inst: &'a ProblemInstance,
    a: &'a RealField,
    d: RealField,
    aa: f64,
    ad: f64,
    dd: f64,
}

impl<'a> Segment<'a> {
    fn new(inst: &'a ProblemInstance, a: &'a Node, d: &Node) -> Self {
        Self {
            inst,
            a: &a.field,
            aa: a.inner(a, inst),
            ad: a.inner(d, inst),
            dd: d.inner(d, inst),
            d: d.field.clone(),
        }
    }

    fn point(&self, s: f64) -> RealField {
        RealField::lin_comb(1.0, self.a, s, &self.d)
    }

    fn energy(&self, s: f64) -> f64 {
        0.5 * (self.aa + 2.0 * s * self.ad + s * s * self.dd) - self.inst.potential(&self.point(s))
    }

    fn slope(&self, s: f64) -> f64 {
        let u = self.point(s);
        self.ad + s * self.dd - self.inst.grad_w_field(&u).l2_dot(&self.d)
    }

    /// Interior critical point where the slope falls through zero.
    fn interior_max(&self) -> Option<f64> {
        if !(self.dd > 0.0) {
            return None;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        if !(self.slope(lo) > 0.0 && self.slope(hi) < 0.0) {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-15 {
                break;
            }
            let fm = self.slope(mid);
            if fm > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// Re-spaces both halves of the path by `X^α` arc length, keeping the peak
/// node fixed.
fn respace(inst: &ProblemInstance, nodes: &mut Vec<Node>, peak: usize) {
    let p = nodes.len() - 1;
    let lengths: Vec<f64> = par::map_range(p, |k| {
        let d = Node::combine(1.0, &nodes[k + 1], -1.0, &nodes[k]);
        d.inner(&d, inst).max(0.0).sqrt()
    });
    let left: f64 = lengths[..peak].iter().sum();
    let right: f64 = lengths[peak..].iter().sum();
    let total = left + right;
    if !(total > 0.0) {
        return;
    }
    let m = ((p as f64 * left / total).round() as usize).clamp(1, p - 1);

    let mut cumulative = Vec::with_capacity(p + 1);
    cumulative.push(0.0);
    for l in &lengths {
        cumulative.push(cumulative.last().unwrap() + l);
    }
    let sample = |target: f64, lo: usize, hi: usize| -> Node {
        // segment k of the old path with cumulative[k] ≤ target ≤ cumulative[k+1]
        let mut k = lo;
        while k + 1 < hi && cumulative[k + 1] < target {
            k += 1;
        }
        let len = lengths[k];
        let s = if len > 0.0 {
            ((target - cumulative[k]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Node::combine(1.0 - s, &nodes[k], s, &nodes[k + 1])
    };
    let mut fresh = Vec::with_capacity(p + 1);
    fresh.push(nodes[0].clone());
    for j in 1..m {
        fresh.push(sample(left * j as f64 / m as f64, 0, peak));
    }
    fresh.push(nodes[peak].clone());
    for j in 1..(p - m) {
        fresh.push(sample(left + right * j as f64 / (p - m) as f64, peak, p));
    }
    fresh.push(nodes[p].clone());
    *nodes = fresh;
}
