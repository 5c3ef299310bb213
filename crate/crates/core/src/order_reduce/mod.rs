//! Order-reducing multipliers `Ξ±ᵗ = op((⟨ξ'⟩ ± iξₙ)ᵗ)` and the
//! μ-transmission spaces built from them.
//!
//! In one dimension `⟨ξ'⟩ = 1`. On an interval the two ends are handled by
//! a smooth partition of unity: `Ξ₊` acts on the part near the left end
//! (where the domain lies to the right) and `Ξ₋` on the part near the right
//! end.

mod spaces;
mod trace;

pub use spaces::*;
pub use trace::*;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TorusGrid};
use crate::jet::powc_principal;
use crate::symbols::Sign;
use num_complex::Complex64;

/// `(⟨ξ'⟩ ± iξₙ)ᵗ`.
pub fn chi_value(t: f64, sign: Sign, xi: &[f64]) -> Complex64 {
    let n = xi.len();
    let tang = (1.0 + xi[..n - 1].iter().map(|v| v * v).sum::<f64>()).sqrt();
    powc_principal(Complex64::new(tang, sign.factor() * xi[n - 1]), Complex64::new(t, 0.0))
}

/// `Ξ±ᵗu` as a Fourier multiplier on the torus.
pub fn apply_order_reducer(t: f64, sign: Sign, u: &GridFunction) -> GridFunction {
    if t == 0.0 {
        return u.clone();
    }
    u.multiply_spectrum(|xi| chi_value(t, sign, xi))
}

/// Spectral filter `exp(-36 η^8)`, `η = |ξ|/ξ_max` per axis maximum.
pub fn spectral_filter(grid: &TorusGrid, xi: &[f64]) -> f64 {
    let kmax = std::f64::consts::PI / grid.spacing();
    let eta2 = xi.iter().map(|v| (v / kmax).powi(2)).sum::<f64>();
    (-36.0 * eta2.powi(4)).exp()
}

/// `Ξ±ᵗu` followed by the spectral filter.
pub fn apply_order_reducer_filtered(t: f64, sign: Sign, u: &GridFunction) -> GridFunction {
    let grid = u.grid;
    u.multiply_spectrum(|xi| chi_value(t, sign, xi) * spectral_filter(&grid, xi))
}

/// Largest `|Ξ±ᵗu|` at nodes farther than 4 cells outside the closed
/// halfspace `±xₙ >= 0`, relative to `‖u‖∞`.
pub fn support_leakage(t: f64, sign: Sign, u: &GridFunction) -> Result<f64> {
    let grid = u.grid;
    let s = sign.factor();
    let norm = u.sup_norm();
    let coord = |i: usize| grid.node(i)[grid.dim - 1] * s;
    for i in 0..grid.len() {
        if coord(i) < 0.0 && u.values[i].norm() > 1e-14 * norm.max(1.0) {
            return Err(Error::Argument(format!(
                "u does not vanish outside the {} halfspace",
                if s > 0.0 { "upper" } else { "lower" }
            )));
        }
    }
    if norm == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let v = apply_order_reducer(t, sign, u);
    let delta = 4.0 * grid.spacing();
    let leak = (0..grid.len())
        .filter(|&i| coord(i) < -delta)
        .map(|i| v.values[i].norm())
        .fold(0.0, f64::max);
    Ok(leak / norm)
}
