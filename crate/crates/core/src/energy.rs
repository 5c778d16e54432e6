//! The action functional `I(u) = ½‖u‖²_X − ∫W(t,u)`, its derivative and
//! its `X^α` gradient.

use serde::Serialize;

use crate::error::Result;
use crate::grid::RealField;
use crate::problem::ProblemInstance;
use crate::spaces::{riesz_solve, x_inner, x_norm_sq};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub value: f64,
    /// `½‖u‖²_X`.
    pub quadratic: f64,
    /// `dt·Σ W(t_j, u_j)`.
    pub potential: f64,
    pub grad_norm: f64,
    /// `I(u) − (1/μ)·I′(u)u`.
    pub ps_value: f64,
}

/// Quadratic and potential parts without the gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub quadratic: f64,
    pub potential: f64,
}

impl EnergyParts {
    pub fn value(&self) -> f64 {
        self.quadratic - self.potential
    }
}

pub fn energy_parts(inst: &ProblemInstance, u: &RealField) -> Result<EnergyParts> {
    let quadratic = 0.5 * x_norm_sq(u, inst)?;
    Ok(EnergyParts {
        quadratic,
        potential: inst.potential(u),
    })
}

pub fn energy_value(inst: &ProblemInstance, u: &RealField) -> Result<f64> {
    Ok(energy_parts(inst, u)?.value())
}

/// `I′(u)v = ⟨u, v⟩_X − dt·Σ (∇W(t_j, u_j), v_j)`.
pub fn derivative_action(inst: &ProblemInstance, u: &RealField, v: &RealField) -> Result<f64> {
    let xuv = x_inner(u, v, inst)?;
    Ok(xuv - inst.grad_w_field(u).l2_dot(v))
}

#[derive(Debug, Clone)]
pub struct GradientSolve {
    pub gradient: RealField,
    /// `A^{-1}∇W(u)`, reusable as the next warm start.
    pub riesz: RealField,
    pub cg_iterations: usize,
}

/// `g = u − A^{-1}∇W(u)`, so that `⟨g, v⟩_X = I′(u)v`.
pub fn gradient(inst: &ProblemInstance, u: &RealField) -> Result<RealField> {
    Ok(gradient_solve(inst, u, None)?.gradient)
}

pub fn gradient_solve(inst: &ProblemInstance, u: &RealField, guess: Option<&RealField>) -> Result<GradientSolve> {
    inst.check_field(u)?;
    let rhs = inst.grad_w_field(u);
    let out = riesz_solve(inst, &rhs, guess)?;
    let gradient = RealField::lin_comb(1.0, u, -1.0, &out.solution);
    Ok(GradientSolve {
        gradient,
        riesz: out.solution,
        cg_iterations: out.iterations,
    })
}

pub fn energy(inst: &ProblemInstance, u: &RealField) -> Result<EnergyReport> {
    let parts = energy_parts(inst, u)?;
    let g = gradient(inst, u)?;
    let grad_norm = x_norm_sq(&g, inst)?.max(0.0).sqrt();
    let dwu = inst.grad_w_field(u).l2_dot(u);
    let action_uu = 2.0 * parts.quadratic - dwu;
    Ok(EnergyReport {
        value: parts.value(),
        quadratic: parts.quadratic,
        potential: parts.potential,
        grad_norm,
        ps_value: parts.value() - action_uu / inst.mu(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_instance, InstanceConfig};
    use crate::sampling::{gaussian_bump, random_localized};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn canonical(points: usize) -> ProblemInstance {
        let mut c = InstanceConfig::canonical();
        c.points = points;
        build_instance(&c).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn zero_field() {
        let inst = canonical(1024);
        let z = RealField::zeros(inst.grid(), 1);
        let r = energy(&inst, &z).unwrap();
        assert_eq!((r.value, r.grad_norm, r.ps_value), (0.0, 0.0, 0.0));
        let v = gaussian_bump(inst.grid(), 1);
        assert_eq!(derivative_action(&inst, &z, &v).unwrap(), 0.0);
        assert!(gradient(&inst, &z).unwrap().data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cosine_energy_with_identity_weight() {
        let inst = canonical(1024).with_constant_l(1.0);
        let g = inst.grid().clone();
        let dt = g.spacing();
        let c = 0.3;
        for k in [2, 17] {
            let lambda = g.frequencies()[g.mode_index(k)];
            let cos = RealField::from_fn(&g, |t| (lambda * t).cos());
            let u = cos.scaled(c);
            let cos_sq = cos.l2_norm().powi(2);
            let quartic: f64 = dt * cos.data().iter().map(|v| v.powi(4)).sum::<f64>();
            let expect = 0.5 * c * c * (lambda.powf(1.5) + 1.0) * cos_sq - c.powi(4) * quartic;
            assert!(rel(energy_value(&inst, &u).unwrap(), expect) <= 1e-12);
        }
    }

    #[test]
    fn homogeneity_and_derivative_identities() {
        let inst = canonical(2048);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let u = random_localized(inst.grid(), 1, 3.0, &mut rng);
            let p = energy_parts(&inst, &u).unwrap();
            for s in [0.5, 2.0] {
                let expect = s * s * p.quadratic - s.powi(4) * p.potential;
                let got = energy_value(&inst, &u.scaled(s)).unwrap();
                assert!((got - expect).abs() <= 1e-12 * (s * s * p.quadratic + s.powi(4) * p.potential));
            }
            let duu = derivative_action(&inst, &u, &u).unwrap();
            let expect = 2.0 * p.quadratic - 4.0 * p.potential;
            assert!((duu - expect).abs() <= 1e-12 * (2.0 * p.quadratic + 4.0 * p.potential));
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        let inst = canonical(2048);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..5 {
            let u = random_localized(inst.grid(), 1, 3.0, &mut rng);
            let v = random_localized(inst.grid(), 1, 3.0, &mut rng);
            let h = 1e-5;
            let fd = (energy_value(&inst, &RealField::lin_comb(1.0, &u, h, &v)).unwrap()
                - energy_value(&inst, &RealField::lin_comb(1.0, &u, -h, &v)).unwrap())
                / (2.0 * h);
            let exact = derivative_action(&inst, &u, &v).unwrap();
            assert!((fd - exact).abs() <= 1e-6 * (1.0 + fd.abs()), "{fd} vs {exact}");
        }
    }

    #[test]
    fn gradient_represents_the_derivative() {
        let inst = canonical(4096);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let u = random_localized(inst.grid(), 1, 3.0, &mut rng);
        let g = gradient(&inst, &u).unwrap();
        for _ in 0..10 {
            let v = random_localized(inst.grid(), 1, 5.0, &mut rng);
            let lhs = x_inner(&g, &v, &inst).unwrap();
            let rhs = derivative_action(&inst, &u, &v).unwrap();
            let scale = x_inner(&u, &v, &inst).unwrap().abs() + inst.grad_w_field(&u).l2_dot(&v).abs();
            assert!((lhs - rhs).abs() <= 1e-8 * scale, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn ps_identity_and_parallelogram_law() {
        let inst = canonical(2048);
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..5 {
            let u = random_localized(inst.grid(), 1, 3.0, &mut rng);
            let v = random_localized(inst.grid(), 1, 3.0, &mut rng);
            let r = energy(&inst, &u).unwrap();
            assert!(rel(r.ps_value, 0.25 * 2.0 * r.quadratic) <= 1e-10);
            assert_eq!(r.value, r.quadratic - r.potential);

            let q = |w: &RealField| energy_parts(&inst, w).unwrap().quadratic;
            let lhs = q(&RealField::lin_comb(1.0, &u, 1.0, &v)) + q(&RealField::lin_comb(1.0, &u, -1.0, &v));
            let rhs = 2.0 * q(&u) + 2.0 * q(&v);
            assert!(rel(lhs, rhs) <= 1e-12);
        }
    }

    #[test]
    fn energy_is_resolved_at_the_default_grid() {
        let coarse = canonical(4096);
        let fine = canonical(8192);
        for s in [1.0, 3.0] {
            let f = |t: f64| s * (-t * t).exp();
            let a = energy_value(&coarse, &RealField::from_fn(coarse.grid(), f)).unwrap();
            let b = energy_value(&fine, &RealField::from_fn(fine.grid(), f)).unwrap();
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}
