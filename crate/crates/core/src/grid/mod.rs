//! Periodic grids, discrete Fourier transforms and discrete norms.
//!
//! Conventions on a torus of side `L` with `N` points per axis:
//!
//! * nodes `x_k = -L/2 + kL/N`, `k = 0..N`;
//! * frequencies `ξ_k = 2πk/L`, `k ∈ [-N/2, N/2)`, stored in FFT order;
//! * forward `û_k = N^{-n} Σ_j u_j e^{-iξ_k·x_j}`, inverse
//!   `u_j = Σ_k û_k e^{iξ_k·x_j}`, so `Σ|u|²hⁿ = Lⁿ Σ|û|²`.
//!
//! Values of 2D grid functions are row-major with the last axis fastest.

pub mod hoelder;
pub mod io;
mod mask;

pub use mask::{ellipse_distance, DomainKind, DomainMask};

use crate::error::{Error, Result};
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

pub const MIN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Argument(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::Argument(format!("points per axis must be a power of two >= {MIN_POINTS}, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Argument(format!("side length must be positive, got {length}")));
        }
        Ok(TorusGrid { dim, n, length })
    }

    pub fn line(n: usize, length: f64) -> Self {
        Self::new(1, n, length).expect("valid 1D grid")
    }

    pub fn square(n: usize, length: f64) -> Self {
        Self::new(2, n, length).expect("valid 2D grid")
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn node_1d(&self, k: usize) -> f64 {
        -0.5 * self.length + k as f64 * self.spacing()
    }

    /// Signed frequency index of FFT slot `i`.
    pub fn freq_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn freq_1d(&self, i: usize) -> f64 {
        2.0 * PI * self.freq_index(i) as f64 / self.length
    }

    /// Multi-index of flat position `idx`.
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let m = self.unflatten(idx);
        (0..self.dim).map(|a| self.node_1d(m[a])).collect()
    }

    pub fn freq(&self, idx: usize) -> Vec<f64> {
        let m = self.unflatten(idx);
        (0..self.dim).map(|a| self.freq_1d(m[a])).collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn freqs(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.freq(i)).collect()
    }

    /// `(-1)^{k_1 + ... + k_n}`, the phase between plain FFT and the
    /// centered-node transform.
    fn phase_sign(&self, idx: usize) -> f64 {
        let m = self.unflatten(idx);
        let s: i64 = (0..self.dim).map(|a| self.freq_index(m[a])).sum();
        if s.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Wraps `z` into `[-L/2, L/2)`.
    pub fn wrap(&self, z: f64) -> f64 {
        let l = self.length;
        z - l * ((z + 0.5 * l) / l).floor()
    }

    /// Wraps a cell offset into `[-N/2, N/2)`.
    pub fn wrap_cells(&self, d: i64) -> i64 {
        let n = self.n as i64;
        (d + n / 2).rem_euclid(n) - n / 2
    }

    pub fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().expect("fft plan cache poisoned");
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Unnormalized FFT along every axis, in place.
pub(crate) fn raw_fft(dim: usize, n: usize, data: &mut [Complex64], inverse: bool) {
    let p = plan(n, inverse);
    if dim == 1 {
        p.process(data);
        return;
    }
    p.process(data);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = data[r * n + c];
        }
        p.process(&mut col);
        for r in 0..n {
            data[r * n + c] = col[r];
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: TorusGrid,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        GridFunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        GridFunction { grid, values }
    }

    pub fn from_real_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Spectral coefficients `û` in FFT order.
    pub fn forward(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        raw_fft(self.grid.dim, self.grid.n, &mut data, false);
        let scale = 1.0 / self.grid.len() as f64;
        for (i, v) in data.iter_mut().enumerate() {
            *v *= scale * self.grid.phase_sign(i);
        }
        data
    }

    /// Grid function with spectral coefficients `coeffs` (FFT order).
    pub fn inverse(grid: TorusGrid, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch("spectrum size does not match grid".into()));
        }
        let mut data: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * grid.phase_sign(i))
            .collect();
        raw_fft(grid.dim, grid.n, &mut data, true);
        Ok(GridFunction { grid, values: data })
    }

    /// Applies the Fourier multiplier `m(ξ)`.
    pub fn multiply_spectrum(&self, m: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut c = self.forward();
        for (i, v) in c.iter_mut().enumerate() {
            *v *= m(&self.grid.freq(i));
        }
        Self::inverse(self.grid, &c).expect("same grid")
    }

    /// Trigonometric interpolant at an arbitrary point, from the spectral
    /// coefficients `coeffs` (as returned by [`forward`](Self::forward)).
    /// The Nyquist mode enters as a cosine so real data stay real.
    pub fn trig_eval(grid: &TorusGrid, coeffs: &[Complex64], p: &[f64]) -> Complex64 {
        let half = (grid.n / 2) as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in coeffs.iter().enumerate() {
            let m = grid.unflatten(k);
            let mut factor = Complex64::new(1.0, 0.0);
            for a in 0..grid.dim {
                let xi = grid.freq_1d(m[a]);
                factor *= if grid.freq_index(m[a]) == -half {
                    Complex64::new((xi * p[a]).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, xi * p[a])
                };
            }
            acc += c * factor;
        }
        acc
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `(Σ|u|² hⁿ)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.spacing().powi(self.grid.dim as i32);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h).sqrt()
    }

    /// `Σ u v̄ hⁿ`.
    pub fn inner(&self, other: &GridFunction) -> Complex64 {
        let h = self.grid.spacing().powi(self.grid.dim as i32);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * h
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise product with a function of x.
    pub fn mul_fn(&self, f: impl Fn(&[f64]) -> Complex64) -> Self {
        GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| v * f(&self.grid.node(i)))
                .collect(),
        }
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
pub fn bracket(xi: &[f64]) -> f64 {
    (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Discrete Bessel-potential norm `‖F^{-1}⟨ξ⟩^s û‖_{L_q}` over the torus.
/// For `q = 2` this is `L^{n/2}(Σ⟨ξ⟩^{2s}|û|²)^{1/2}`.
pub fn sobolev_norm(u: &GridFunction, s: f64, q: f64) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::Argument(format!("q must lie in (1, ∞), got {q}")));
    }
    let c = u.forward();
    if q == 2.0 {
        let sum: f64 = c
            .iter()
            .enumerate()
            .map(|(i, v)| bracket(&u.grid.freq(i)).powf(2.0 * s) * v.norm_sqr())
            .sum();
        return Ok(u.grid.length.powf(0.5 * u.grid.dim as f64) * sum.sqrt());
    }
    let w = u.multiply_spectrum(|xi| Complex64::new(bracket(xi).powf(s), 0.0));
    let h = u.grid.spacing().powi(u.grid.dim as i32);
    let sum: f64 = w.values.iter().map(|v| v.norm().powf(q)).sum();
    Ok((sum * h).powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        let g = TorusGrid::line(16, 8.0);
        assert_eq!(g.wrap(4.0), -4.0);
        assert_eq!(g.wrap(-4.0), -4.0);
        assert!((g.wrap(9.5) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn frequencies_are_centered() {
        let g = TorusGrid::line(8, 2.0 * PI);
        let k: Vec<i64> = (0..8).map(|i| g.freq_index(i)).collect();
        assert_eq!(k, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }
}
