//! Seeded generators of test and start fields.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::grid::{Grid, RealField};

/// `exp(-t²)` in every component, scaled by `1/√n`.
pub fn gaussian_bump(grid: &Grid, dim: usize) -> RealField {
    let s = 1.0 / (dim as f64).sqrt();
    RealField::from_fn_components(grid, dim, |t, _| s * (-t * t).exp())
}

/// Sum of one to three Gaussian bumps with random centres in `[-5, 5]`,
/// widths in `[0.5, 2]` and normal amplitudes per component.
pub fn random_bumps(grid: &Grid, dim: usize, rng: &mut impl Rng) -> RealField {
    let count = rng.random_range(1..=3);
    let bumps: Vec<(f64, f64, Vec<f64>)> = (0..count)
        .map(|_| {
            let centre = rng.random_range(-5.0..5.0);
            let width: f64 = rng.random_range(0.5..2.0);
            let amps = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            (centre, width, amps)
        })
        .collect();
    RealField::from_fn_components(grid, dim, |t, c| {
        bumps
            .iter()
            .map(|(m, w, a)| a[c] * (-((t - m) / w).powi(2)).exp())
            .sum()
    })
}

/// Random trigonometric polynomial over the modes `1 ≤ |k| ≤ max_mode`,
/// amplitudes decaying like `1/(1+k/8)`, plus a random mean.
pub fn band_limited(grid: &Grid, dim: usize, max_mode: usize, rng: &mut impl Rng) -> RealField {
    let max_mode = max_mode.min(grid.points() / 2 - 1);
    let coeffs: Vec<Vec<(f64, f64)>> = (0..dim)
        .map(|_| {
            (0..=max_mode)
                .map(|k| {
                    let s = 1.0 / (1.0 + k as f64 / 8.0);
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    (s * a, if k == 0 { 0.0 } else { s * b })
                })
                .collect()
        })
        .collect();
    let base = PI / grid.half_length();
    RealField::from_fn_components(grid, dim, |t, c| {
        coeffs[c]
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let x = base * k as f64 * t;
                a * x.cos() + b * x.sin()
            })
            .sum()
    })
}

/// Random smooth field with compact-looking support: band-limited noise
/// under a Gaussian envelope of width `width`.
pub fn random_localized(grid: &Grid, dim: usize, width: f64, rng: &mut impl Rng) -> RealField {
    let noise = band_limited(grid, dim, 24, rng);
    let mut out = noise;
    for c in 0..dim {
        for (j, v) in out.component_mut(c).iter_mut().enumerate() {
            let t = grid.node(j);
            *v *= (-(t / width).powi(2)).exp();
        }
    }
    out
}
