use std::f64::consts::PI;

use frachamil::energy::{derivative_action, energy, energy_parts, energy_value};
use frachamil::fracops::{compose_right_left, derivative, liouville_weyl_integral, Side};
use frachamil::mpa::{nehari_sigma, SolverConfig};
use frachamil::problem::{build_instance, growth_check, InstanceConfig, LConfig, ProblemInstance, WConfig};
use frachamil::spaces::{norms, x_inner, x_norm_sq};
use frachamil::{forward_transform, inverse_transform, Grid, RealField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const HALF: f64 = 20.0;
const POINTS: usize = 256;

fn grid() -> Grid {
    Grid::new(HALF, POINTS).unwrap()
}

/// Zero-mean trigonometric polynomial over modes `1..=coeffs.len()`.
fn field(coeffs: &[(f64, f64)]) -> RealField {
    let g = grid();
    RealField::from_fn(&g, |t| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let x = PI * (k + 1) as f64 * t / HALF;
                a * x.cos() + b * x.sin()
            })
            .sum()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..16)
}

fn instance(alpha: f64, scale: f64, mu: f64, b: f64) -> ProblemInstance {
    build_instance(&InstanceConfig {
        alpha,
        n: 1,
        half_length: HALF,
        points: POINTS,
        l: LConfig::ScalarPoly { p: 1.0, scale },
        w: WConfig::PurePower {
            mu,
            b: format!("const:{b}"),
        },
    })
    .unwrap()
}

fn max_diff(a: &RealField, b: &RealField) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_roundtrip(c in coeffs()) {
        let u = field(&c);
        let back = inverse_transform(&forward_transform(&u)).unwrap();
        prop_assert!(max_diff(&u, &back) <= 1e-13 * (1.0 + u.sup_norm()));
    }

    #[test]
    fn derivative_is_linear(c in coeffs(), d in coeffs(), a in -2.0..2.0f64, alpha in 0.05..0.95f64) {
        let (u, v) = (field(&c), field(&d));
        let lhs = derivative(&RealField::lin_comb(a, &u, 1.0, &v), alpha, Side::Left).unwrap();
        let rhs = RealField::lin_comb(a, &derivative(&u, alpha, Side::Left).unwrap(), 1.0, &derivative(&v, alpha, Side::Left).unwrap());
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-11 * (1.0 + lhs.sup_norm()));
    }

    #[test]
    fn reflection_swaps_sides(c in coeffs(), alpha in 0.05..0.95f64) {
        let u = field(&c);
        let left_of_reflected = derivative(&u.reflected(), alpha, Side::Left).unwrap();
        let reflected_right = derivative(&u, alpha, Side::Right).unwrap().reflected();
        prop_assert!(max_diff(&left_of_reflected, &reflected_right) <= 1e-11 * (1.0 + reflected_right.sup_norm()));
    }

    #[test]
    fn integral_inverts_derivative(c in coeffs(), alpha in 0.05..0.95f64) {
        let u = field(&c);
        for side in [Side::Left, Side::Right] {
            let back = liouville_weyl_integral(&derivative(&u, alpha, side).unwrap(), alpha, side).unwrap();
            prop_assert!(max_diff(&u, &back) <= 1e-10 * (1.0 + u.sup_norm()));
        }
    }

    #[test]
    fn composition_is_right_of_left(c in coeffs(), alpha in 0.05..0.95f64) {
        let u = field(&c);
        let two_step = derivative(&derivative(&u, alpha, Side::Left).unwrap(), alpha, Side::Right).unwrap();
        let one_step = compose_right_left(&u, alpha).unwrap();
        prop_assert!(max_diff(&two_step, &one_step) <= 1e-10 * (1.0 + one_step.sup_norm()));
    }

    #[test]
    fn norm_relations(c in coeffs(), alpha in 0.55..0.95f64, scale in 0.25..4.0f64) {
        let inst = instance(alpha, scale, 4.0, 1.0);
        let u = field(&c);
        let r = norms(&u, &inst).unwrap();
        let k = inst.l_min().max(1.0) / inst.l_min();
        prop_assert!(r.norm_alpha.powi(2) <= k * r.norm_x.powi(2) * (1.0 + 1e-12));
        prop_assert!(r.l2 <= r.norm_x / inst.l_min().sqrt() * (1.0 + 1e-12));
        prop_assert!(r.seminorm_alpha <= r.norm_alpha);
        let s = x_norm_sq(&u.scaled(3.0), &inst).unwrap();
        prop_assert!((s - 9.0 * r.norm_x.powi(2)).abs() <= 1e-12 * s);
    }

    #[test]
    fn inner_product_is_symmetric(c in coeffs(), d in coeffs(), scale in 0.25..4.0f64) {
        let inst = instance(0.75, scale, 4.0, 1.0);
        let (u, v) = (field(&c), field(&d));
        let (a, b) = (x_inner(&u, &v, &inst).unwrap(), x_inner(&v, &u, &inst).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (x_norm_sq(&u, &inst).unwrap() * x_norm_sq(&v, &inst).unwrap()).sqrt());
    }

    #[test]
    fn energy_along_rays(c in coeffs(), mu in 2.5..6.0f64, b in 0.5..2.0f64, s in 0.1..3.0f64) {
        let inst = instance(0.75, 1.0, mu, b);
        let u = field(&c);
        let p = energy_parts(&inst, &u).unwrap();
        let expect = s * s * p.quadratic - s.powf(mu) * p.potential;
        let got = energy_value(&inst, &u.scaled(s)).unwrap();
        prop_assert!((got - expect).abs() <= 1e-11 * (s * s * p.quadratic + s.powf(mu) * p.potential));
        let duu = derivative_action(&inst, &u, &u).unwrap();
        prop_assert!((duu - (2.0 * p.quadratic - mu * p.potential)).abs() <= 1e-11 * (2.0 * p.quadratic + mu * p.potential));
    }

    #[test]
    fn nehari_scaling_maximizes_the_ray(c in coeffs(), mu in 2.5..6.0f64, b in 0.5..2.0f64) {
        let inst = instance(0.75, 1.0, mu, b);
        let u = field(&c);
        let s = nehari_sigma(&inst, &u).unwrap();
        let at = |f: f64| energy_value(&inst, &u.scaled(f * s)).unwrap();
        prop_assert!(at(1.0) >= at(0.98) && at(1.0) >= at(1.02));
        prop_assert!(at(1.0) > 0.0);
    }

    #[test]
    fn ps_identity_for_pure_powers(c in coeffs(), mu in 2.5..6.0f64, b in 0.5..2.0f64) {
        let inst = instance(0.75, 1.0, mu, b);
        let u = field(&c);
        let r = energy(&inst, &u).unwrap();
        let expect = (0.5 - 1.0 / mu) * 2.0 * r.quadratic;
        prop_assert!((r.ps_value - expect).abs() <= 1e-10 * expect);
    }

    #[test]
    fn growth_bounds_hold_for_constant_weights(mu in 2.5..6.0f64, b in 0.5..2.0f64, seed in any::<u64>()) {
        let inst = instance(0.75, 1.0, mu, b);
        let r = growth_check(&inst, 500, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(r.violations, 0);
        prop_assert!((r.c1 - b).abs() <= 1e-12 * b && (r.c2 - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn solver_config_roundtrip(p in 2usize..100, tol in 1e-10..1e-2f64, it in 1usize..10000, r in 1usize..10, seed in any::<u64>()) {
        let c = SolverConfig { path_points: p, tol, max_iter: it, restarts: r, seed };
        let back: SolverConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(c, back);
    }
}
