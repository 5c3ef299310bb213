//! Closed forms and an independent singular-integral evaluation of the
//! fractional Laplacian.

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::GridFunction;
use crate::quadrature::gauss_legendre;
use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// `c_{n,a} = 4^a Γ(n/2 + a) / (π^{n/2} |Γ(-a)|)`, the constant of the
/// singular-integral form of `(-Δ)^a` in dimension `n`.
pub fn frac_laplacian_constant(n: usize, a: f64) -> f64 {
    let nh = 0.5 * n as f64;
    4f64.powf(a) * gamma(nh + a) / (PI.powf(nh) * gamma(-a).abs())
}

/// Prefactor of the solution of `(-Δ)^a u = 1` on the unit ball of `ℝⁿ`:
/// `u = κ (1 - |x|²)₊^a`.
pub fn getoor_prefactor(n: usize, a: f64) -> f64 {
    let nh = 0.5 * n as f64;
    gamma(nh) / (4f64.powf(a) * gamma(nh + a) * gamma(1.0 + a))
}

/// The ball solution at `x`.
pub fn getoor_solution(a: f64, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 >= 1.0 {
        0.0
    } else {
        getoor_prefactor(x.len(), a) * (1.0 - r2).powf(a)
    }
}

/// `(-Δ)^a (1 - |x|²)₊^a`, constant inside the ball.
pub fn getoor_constant(n: usize, a: f64) -> f64 {
    1.0 / getoor_prefactor(n, a)
}

/// `γ₀^a u` of the ball solution: `Γ(1+a) κ 2^a`.
pub fn getoor_trace(n: usize, a: f64) -> f64 {
    gamma(1.0 + a) * getoor_prefactor(n, a) * 2f64.powf(a)
}

const IMAGE_SHELLS_1D: i64 = 64;
const IMAGE_SHELLS_2D: i64 = 16;

/// `Σ_{k ≠ 0} |D + kL|^{-(n+2a)}` for an offset `D` with `|D_i| < L`:
/// explicit shells up to `K`, then the integral tail.
pub struct ImageSum {
    dim: usize,
    length: f64,
    s: f64,
    tail_2d: f64,
}

impl ImageSum {
    pub fn new(dim: usize, a: f64, length: f64) -> Self {
        let s = dim as f64 + 2.0 * a;
        let tail_2d = if dim == 2 {
            // (1/L²)∫_{|z|∞ > R} |z|^{-s} dz = R^{-2a}/(2a L²)·8∫_0^{π/4} cos^{2a}θ dθ
            let r = (IMAGE_SHELLS_2D as f64 + 0.5) * length;
            let (x, w) = gauss_legendre(32);
            let ang: f64 = x
                .iter()
                .zip(&w)
                .map(|(t, w)| w * (PI / 8.0 * (t + 1.0)).cos().powf(2.0 * a))
                .sum::<f64>()
                * PI
                / 8.0;
            8.0 * ang * r.powf(-2.0 * a) / (2.0 * a * length * length)
        } else {
            0.0
        };
        ImageSum {
            dim,
            length,
            s,
            tail_2d,
        }
    }

    pub fn eval(&self, d: &[f64]) -> f64 {
        let l = self.length;
        let s = self.s;
        if self.dim == 1 {
            let k_max = IMAGE_SHELLS_1D;
            let mut acc = 0.0;
            for k in 1..=k_max {
                let kl = k as f64 * l;
                acc += (kl + d[0]).powf(-s) + (kl - d[0]).powf(-s);
            }
            let r = (k_max as f64 + 0.5) * l;
            let (zp, zm) = (r + d[0], r - d[0]);
            // midpoint tail plus its first Euler-Maclaurin correction
            acc + (zp.powf(1.0 - s) + zm.powf(1.0 - s)) / (l * (s - 1.0)) - s * l * (zp.powf(-s - 1.0) + zm.powf(-s - 1.0)) / 24.0
        } else {
            let k_max = IMAGE_SHELLS_2D;
            let mut acc = 0.0;
            for k0 in -k_max..=k_max {
                for k1 in -k_max..=k_max {
                    if k0 == 0 && k1 == 0 {
                        continue;
                    }
                    let z0 = d[0] + k0 as f64 * l;
                    let z1 = d[1] + k1 as f64 * l;
                    acc += (z0 * z0 + z1 * z1).powf(-0.5 * s);
                }
            }
            acc + self.tail_2d
        }
    }
}

/// `c_{1,a} p.v.∫ (u(x) - u(y)) / |x - y|^{1+2a} dy` at every node, with `u`
/// taken as its samples on `[-L/2, L/2)` and zero outside (no periodic
/// wrap). Symmetric second differences on the node lattice, the interval
/// `|z| < h/2` from the discrete second derivative, and the far tail in
/// closed form.
pub fn frac_laplacian_oracle(u: &GridFunction, a: f64) -> Result<GridFunction> {
    let grid = u.grid;
    if grid.dim != 1 {
        return Err(Error::Capability("the singular-integral oracle is one-dimensional".into()));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Argument(format!("oracle needs 0 < a < 1, got {a}")));
    }
    let n = grid.n;
    let h = grid.spacing();
    let s = 1.0 + 2.0 * a;
    let c = frac_laplacian_constant(1, a);
    let weights: Vec<f64> = (0..=n).map(|m| if m == 0 { 0.0 } else { h * (m as f64 * h).powf(-s) }).collect();
    let far = h.powf(1.0 - s) * (n as f64 + 0.5).powf(1.0 - s) / (s - 1.0);
    let at = |j: i64| -> Complex64 {
        if j < 0 || j >= n as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            u.values[j as usize]
        }
    };
    let values = exec::map_indexed(n, |i| {
        let ui = u.values[i];
        let ii = i as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, w) in weights.iter().enumerate().skip(1) {
            let m = m as i64;
            acc += (ui * 2.0 - at(ii + m) - at(ii - m)) * *w;
        }
        let second = (at(ii + 1) + at(ii - 1) - ui * 2.0) / (h * h);
        let near = -second * (0.5 * h).powf(3.0 - s) / (3.0 - s);
        c * (acc + near + ui * 2.0 * far)
    });
    GridFunction::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_laplacian_constants() {
        // c_{1,1/2} = 1/π and, in 1D with a = 1/2, u = (1 - x²)^{1/2}
        assert!((frac_laplacian_constant(1, 0.5) - 1.0 / PI).abs() < 1e-14);
        assert!((getoor_prefactor(1, 0.5) * getoor_constant(1, 0.5) - 1.0).abs() < 1e-15);
        assert!((getoor_prefactor(1, 0.5) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn image_sum_matches_brute_force() {
        let a = 0.3;
        let s = 1.0 + 2.0 * a;
        let img = ImageSum::new(1, a, 8.0);
        let brute: f64 = (1..2_000_000)
            .map(|k| (8.0 * k as f64 + 1.5).powf(-s) + (8.0 * k as f64 - 1.5).powf(-s))
            .sum::<f64>();
        // the brute-force tail beyond 2e6 periods is still ~ 1e-5 relative
        let tail = 2.0 * (8.0 * 1_999_999.5f64).powf(1.0 - s) / (8.0 * (s - 1.0));
        assert!((img.eval(&[1.5]) - brute - tail).abs() < 1e-9 * brute);
    }
}
