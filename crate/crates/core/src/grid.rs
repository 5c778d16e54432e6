//! Truncated-line geometry, sampled fields and the discrete Fourier pair.
//!
//! The line is replaced by the torus `[-T, T)` sampled at `t_j = -T + j·dt`.
//! Coefficients are stored in ascending frequency order, index `i` holding
//! mode `k = i - N/2`, so `coeffs[0]` is the unpaired mode `-N/2`.
//!
//! Normalization: the forward transform carries the quadrature weight `dt`
//! (approximating `∫ e^{-itw} u(t) dt`), the inverse carries `1/(2T)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative size of the imaginary part the inverse transform may discard.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform grid on `[-T, T)` with its frequency lattice `w_k = πk/T`.
#[derive(Clone)]
pub struct Grid {
    half_length: f64,
    points: usize,
    spacing: f64,
    frequencies: Arc<[f64]>,
    plans: Arc<Plans>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.half_length == other.half_length
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_length", &self.half_length)
            .field("points", &self.points)
            .field("spacing", &self.spacing)
            .finish()
    }
}

impl Grid {
    pub fn new(half_length: f64, points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Config(format!(
                "grid half-length must be positive, got {half_length}"
            )));
        }
        if points < 8 || !points.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "grid point count must be even and at least 8, got {points}"
            )));
        }
        let half = (points / 2) as i64;
        let frequencies: Arc<[f64]> = (-half..half)
            .map(|k| std::f64::consts::PI * k as f64 / half_length)
            .collect();
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        };
        Ok(Self {
            half_length,
            points,
            spacing: 2.0 * half_length / points as f64,
            frequencies,
            plans: Arc::new(plans),
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Frequencies in ascending order, `k = -N/2 … N/2-1`.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Array index of mode `k` in ascending storage.
    pub fn mode_index(&self, k: i64) -> usize {
        let half = (self.points / 2) as i64;
        assert!((-half..half).contains(&k), "mode {k} outside lattice");
        (k + half) as usize
    }

    /// Mode number stored at ascending index `i`.
    pub fn mode_at(&self, i: usize) -> i64 {
        i as i64 - (self.points / 2) as i64
    }

    /// Sample location `t_j = -T + j·dt`.
    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|j| self.node(j))
    }

    /// Index of the reflected node `-t_j` on the torus.
    pub fn reflect_index(&self, j: usize) -> usize {
        (self.points - j) % self.points
    }
}

/// Vector-valued samples `u(t_j) ∈ ℝⁿ`, stored one component after another.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    dim: usize,
    data: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: &Grid, dim: usize) -> Self {
        assert!(dim > 0, "field dimension must be positive");
        Self {
            grid: grid.clone(),
            dim,
            data: vec![0.0; dim * grid.points()],
        }
    }

    /// Scalar field from samples.
    pub fn scalar(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        Self::from_data(grid, 1, values)
    }

    /// Builds from component-major data (`data[c·N + j]`).
    pub fn from_data(grid: &Grid, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * grid.points() {
            return Err(Error::GridMismatch);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            grid: grid.clone(),
            dim,
            data,
        })
    }

    /// `f(t)` sampled on every node, scalar case.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: grid.clone(),
            dim: 1,
            data: grid.nodes().map(f).collect(),
        }
    }

    /// `f(t, c)` for component `c`.
    pub fn from_fn_components(grid: &Grid, dim: usize, f: impl Fn(f64, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * grid.points());
        for c in 0..dim {
            data.extend(grid.nodes().map(|t| f(t, c)));
        }
        Self {
            grid: grid.clone(),
            dim,
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.grid.points();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.points();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn value(&self, j: usize, c: usize) -> f64 {
        self.data[c * self.grid.points() + j]
    }

    /// The n-vector `u(t_j)`.
    pub fn node_value(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|c| self.value(j, c)).collect()
    }

    /// Euclidean length `|u(t_j)|`.
    pub fn node_norm(&self, j: usize) -> f64 {
        (0..self.dim)
            .map(|c| self.value(j, c).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_compatible(&self, other: &RealField) -> bool {
        self.dim == other.dim && self.grid == other.grid
    }

    pub fn ensure_compatible(&self, other: &RealField) -> Result<()> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scaled(&self, a: f64) -> RealField {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// `self += a·x`.
    pub fn axpy(&mut self, a: f64, x: &RealField) {
        debug_assert!(self.is_compatible(x));
        self.data
            .iter_mut()
            .zip(&x.data)
            .for_each(|(s, &xi)| *s += a * xi);
    }

    /// `a·x + b·y`.
    pub fn lin_comb(a: f64, x: &RealField, b: f64, y: &RealField) -> RealField {
        debug_assert!(x.is_compatible(y));
        let data = x
            .data
            .iter()
            .zip(&y.data)
            .map(|(&xi, &yi)| a * xi + b * yi)
            .collect();
        RealField {
            grid: x.grid.clone(),
            dim: x.dim,
            data,
        }
    }

    /// Discrete `L²` inner product `dt·Σ_j (u_j, v_j)`.
    pub fn l2_dot(&self, other: &RealField) -> f64 {
        debug_assert!(self.is_compatible(other));
        self.grid.spacing() * dot(&self.data, &other.data)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_dot(self).sqrt()
    }

    /// `max_j |u(t_j)|`.
    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.points())
            .map(|j| self.node_norm(j))
            .fold(0.0, f64::max)
    }

    /// `max |u(t_j)|` over nodes with `|t_j| ≥ fraction·T`.
    pub fn tail_max(&self, fraction: f64) -> f64 {
        let cut = fraction * self.grid.half_length();
        (0..self.grid.points())
            .filter(|&j| self.grid.node(j).abs() >= cut)
            .map(|j| self.node_norm(j))
            .fold(0.0, f64::max)
    }

    /// Discrete mean of each component.
    pub fn means(&self) -> Vec<f64> {
        let n = self.grid.points() as f64;
        (0..self.dim)
            .map(|c| self.component(c).iter().sum::<f64>() / n)
            .collect()
    }

    /// Field reflected in time, `t ↦ u(-t)`.
    pub fn reflected(&self) -> RealField {
        let mut out = self.clone();
        for c in 0..self.dim {
            let src = self.component(c);
            let dst = out.component_mut(c);
            for (j, d) in dst.iter_mut().enumerate() {
                *d = src[self.grid.reflect_index(j)];
            }
        }
        out
    }

    /// Band-limited interpolation onto another grid with the same `T`.
    pub fn resample(&self, target: &Grid) -> Result<RealField> {
        if target.half_length() != self.grid.half_length() {
            return Err(Error::Config(
                "resampling requires grids with equal half-length".into(),
            ));
        }
        let spectrum = forward_transform(self);
        let mut out = SpectralField::zeros(target, self.dim);
        let lo = (self.grid.points().min(target.points()) / 2) as i64;
        for c in 0..self.dim {
            for k in (-lo + 1)..lo {
                let v = spectrum.coeff(c, k);
                out.set_coeff(c, k, v);
            }
        }
        inverse_transform(&out)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Complex coefficients of a [`RealField`], ascending frequency order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    dim: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid, dim: usize) -> Self {
        Self {
            grid: grid.clone(),
            dim,
            coeffs: vec![Complex64::new(0.0, 0.0); dim * grid.points()],
        }
    }

    pub fn from_coeffs(grid: &Grid, dim: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || coeffs.len() != dim * grid.points() {
            return Err(Error::GridMismatch);
        }
        if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            grid: grid.clone(),
            dim,
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.grid.points();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.grid.points();
        &mut self.coeffs[c * n..(c + 1) * n]
    }

    pub fn coeff(&self, c: usize, k: i64) -> Complex64 {
        self.coeffs[c * self.grid.points() + self.grid.mode_index(k)]
    }

    pub fn set_coeff(&mut self, c: usize, k: i64, v: Complex64) {
        let i = c * self.grid.points() + self.grid.mode_index(k);
        self.coeffs[i] = v;
    }

    /// Multiplies every component by `symbol[i]` (ascending order).
    pub fn apply_multiplier(&mut self, symbol: &[Complex64]) {
        let n = self.grid.points();
        assert_eq!(symbol.len(), n);
        for chunk in self.coeffs.chunks_mut(n) {
            chunk.iter_mut().zip(symbol).for_each(|(z, s)| *z *= s);
        }
    }

    /// Multiplies every component by a real multiplier.
    pub fn apply_real_multiplier(&mut self, symbol: &[f64]) {
        let n = self.grid.points();
        assert_eq!(symbol.len(), n);
        for chunk in self.coeffs.chunks_mut(n) {
            chunk.iter_mut().zip(symbol).for_each(|(z, s)| *z *= *s);
        }
    }

    /// Spectral `L²` norm `((1/2T)·Σ_k |c_k|²)^{1/2}`, matching the
    /// physical-space norm by discrete Plancherel.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|z| z.norm_sqr()).sum();
        (s / (2.0 * self.grid.half_length())).sqrt()
    }

    /// Weighted spectral sum `(1/2T)·Σ_k weight_k·|c_k|²`.
    pub fn weighted_energy(&self, weight: &[f64]) -> f64 {
        let n = self.grid.points();
        let s: f64 = self
            .coeffs
            .chunks(n)
            .map(|chunk| {
                chunk
                    .iter()
                    .zip(weight)
                    .map(|(z, w)| w * z.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        s / (2.0 * self.grid.half_length())
    }

    /// Weighted spectral inner product `(1/2T)·Σ_k weight_k·Re(a_k conj(b_k))`.
    pub fn weighted_dot(&self, other: &SpectralField, weight: &[f64]) -> f64 {
        let n = self.grid.points();
        let s: f64 = self
            .coeffs
            .chunks(n)
            .zip(other.coeffs.chunks(n))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .zip(weight)
                    .map(|((x, y), w)| w * (x.re * y.re + x.im * y.im))
                    .sum::<f64>()
            })
            .sum();
        s / (2.0 * self.grid.half_length())
    }
}

fn sign_of_mode(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `coeff(k) = dt·Σ_j e^{-i t_j w_k} u(t_j)`.
pub fn forward_transform(u: &RealField) -> SpectralField {
    let grid = u.grid();
    let n = grid.points();
    let dt = grid.spacing();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); u.dim() * n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..u.dim() {
        buf.iter_mut()
            .zip(u.component(c))
            .for_each(|(b, &v)| *b = Complex64::new(v, 0.0));
        grid.plans.forward.process(&mut buf);
        let out = &mut coeffs[c * n..(c + 1) * n];
        for (i, o) in out.iter_mut().enumerate() {
            let k = grid.mode_at(i);
            let m = k.rem_euclid(n as i64) as usize;
            // e^{-i t_j w_k} = (-1)^k e^{-2πi jk/N} because t_0 = -T
            *o = buf[m] * (dt * sign_of_mode(k));
        }
    }
    SpectralField {
        grid: grid.clone(),
        dim: u.dim(),
        coeffs,
    }
}

/// Inverse of [`forward_transform`]; fails when the coefficients do not
/// describe a real field (broken conjugate symmetry).
pub fn inverse_transform(s: &SpectralField) -> Result<RealField> {
    let grid = s.grid();
    let n = grid.points();
    let inv = 1.0 / (2.0 * grid.half_length());
    let mut data = vec![0.0; s.dim() * n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut max_im: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for c in 0..s.dim() {
        for (i, &z) in s.component(c).iter().enumerate() {
            let k = grid.mode_at(i);
            let m = k.rem_euclid(n as i64) as usize;
            buf[m] = z * sign_of_mode(k);
        }
        grid.plans.inverse.process(&mut buf);
        for (d, z) in data[c * n..(c + 1) * n].iter_mut().zip(&buf) {
            let v = z * inv;
            max_im = max_im.max(v.im.abs());
            max_abs = max_abs.max(v.norm());
            *d = v.re;
        }
    }
    if !(max_im.is_finite() && max_abs.is_finite()) {
        return Err(Error::NonFinite);
    }
    if max_im > IMAGINARY_TOLERANCE * max_abs {
        return Err(Error::ImaginaryResidue {
            residue: max_im,
            scale: max_abs,
        });
    }
    Ok(RealField {
        grid: grid.clone(),
        dim: s.dim(),
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_rejects_bad_configuration() {
        assert!(Grid::new(40.0, 7).is_err());
        assert!(Grid::new(40.0, 6).is_err());
        assert!(Grid::new(0.0, 64).is_err());
        assert!(Grid::new(-1.0, 64).is_err());
    }

    #[test]
    fn default_grid_geometry() {
        let g = Grid::new(40.0, 4096).unwrap();
        assert_eq!(g.spacing(), 0.01953125);
        assert_eq!(g.spacing() * 4096.0, 80.0);
        let w = g.frequencies();
        assert_eq!(w.len(), 4096);
        assert_eq!(*w.last().unwrap(), std::f64::consts::PI * 2047.0 / 40.0);
        assert!(w.windows(2).all(|p| p[0] < p[1]));
        assert_eq!(w[g.mode_index(0)], 0.0);
        for k in 1..2048 {
            assert_eq!(w[g.mode_index(k)], -w[g.mode_index(-k)]);
        }
    }

    #[test]
    fn small_grid_frequencies() {
        let g = Grid::new(1.0, 8).unwrap();
        let expect: Vec<f64> = (-4..4)
            .map(|k| std::f64::consts::PI * k as f64)
            .collect();
        assert_eq!(g.frequencies(), expect.as_slice());
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let g = Grid::new(40.0, 256).unwrap();
        let s = forward_transform(&RealField::zeros(&g, 2));
        assert!(s.coeffs().iter().all(|z| z.norm() == 0.0));
        let back = inverse_transform(&SpectralField::zeros(&g, 2)).unwrap();
        assert!(back.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cosine_concentrates_on_first_modes() {
        let g = Grid::new(40.0, 4096).unwrap();
        let w1 = g.frequencies()[g.mode_index(1)];
        let u = RealField::from_fn(&g, |t| (w1 * t).cos());
        let s = forward_transform(&u);
        for i in 0..g.points() {
            let k = g.mode_at(i);
            let z = s.coeff(0, k);
            if k.abs() == 1 {
                assert!((z.re - 40.0).abs() < 1e-10 && z.im.abs() < 1e-10, "{z}");
            } else {
                assert!(z.norm() < 1e-10, "mode {k}: {z}");
            }
        }
        let back = inverse_transform(&s).unwrap();
        let err = back
            .data()
            .iter()
            .zip(u.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let g = Grid::new(10.0, 64).unwrap();
        let mut s = SpectralField::zeros(&g, 1);
        s.set_coeff(0, 3, Complex64::new(1.0, 0.0));
        assert!(matches!(
            inverse_transform(&s),
            Err(Error::ImaginaryResidue { .. })
        ));
    }

    #[test]
    fn plancherel_and_round_trip_on_random_fields() {
        let g = Grid::new(40.0, 1024).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let data: Vec<f64> = (0..2 * g.points()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u = RealField::from_data(&g, 2, data).unwrap();
            let s = forward_transform(&u);
            let rel = (s.l2_norm().powi(2) - u.l2_norm().powi(2)).abs() / u.l2_norm().powi(2);
            assert!(rel <= 1e-12, "{rel}");
            let back = inverse_transform(&s).unwrap();
            let scale = u.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = back
                .data()
                .iter()
                .zip(u.data())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-12 * scale, "{err}");
        }
    }

    #[test]
    fn transform_is_linear() {
        let g = Grid::new(5.0, 128).unwrap();
        let u = RealField::from_fn(&g, |t| (-t * t).exp());
        let v = RealField::from_fn(&g, |t| t.sin() / (1.0 + t * t));
        let lhs = forward_transform(&RealField::lin_comb(2.5, &u, -0.75, &v));
        let (su, sv) = (forward_transform(&u), forward_transform(&v));
        for i in 0..g.points() {
            let rhs = su.coeffs()[i] * 2.5 - sv.coeffs()[i] * 0.75;
            assert!((lhs.coeffs()[i] - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn resample_preserves_band_limited_field() {
        let g = Grid::new(20.0, 512).unwrap();
        let fine = Grid::new(20.0, 1024).unwrap();
        let f = |t: f64| (-t * t / 2.0).exp();
        let u = RealField::from_fn(&g, f);
        let r = u.resample(&fine).unwrap();
        let expect = RealField::from_fn(&fine, f);
        let err = r
            .data()
            .iter()
            .zip(expect.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }
}
