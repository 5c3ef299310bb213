//! Dyadic partition of unity and windowed kernels.
//!
//! `ψ(r) = 1` for `r <= 1`, `0` for `r >= 2`; `φ_0(ξ) = ψ(|ξ|)` and
//! `φ_j(ξ) = ψ(2^{-j}|ξ|) - ψ(2^{1-j}|ξ|)`, so that
//! `supp φ_j ⊂ {2^{j-1} <= |ξ| <= 2^{j+1}}` and `φ_j(ξ) = φ_1(2^{1-j}ξ)`.

use super::PointAmplitude;
use crate::cutoff::{step_down, step_down_scalar};
use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::quadrature::gauss_legendre;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Radial profile ψ.
pub fn dyadic_psi(r: f64) -> f64 {
    step_down(r - 1.0)
}

fn psi_s<S: Scalar>(r: S) -> S {
    step_down_scalar(r - S::from_real(1.0))
}

/// `φ_j(ξ)`.
pub fn dyadic_phi(j: u32, xi: &[f64]) -> f64 {
    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if j == 0 {
        dyadic_psi(r)
    } else {
        dyadic_psi(r / 2f64.powi(j as i32)) - dyadic_psi(r / 2f64.powi(j as i32 - 1))
    }
}

/// `φ_j` as a jet in ξ (requires ξ ≠ 0).
fn dyadic_phi_jet(j: u32, xi: &[f64]) -> Jet {
    let mut r2 = Jet::constant(Complex64::new(0.0, 0.0));
    for (k, &v) in xi.iter().enumerate() {
        let x = Jet::variable(k, v);
        r2 = r2 + x * x;
    }
    let r = r2.sqrt();
    if j == 0 {
        psi_s(r)
    } else {
        let a = r.scale(Complex64::new(2f64.powi(-(j as i32)), 0.0));
        let b = r.scale(Complex64::new(2f64.powi(1 - j as i32), 0.0));
        psi_s(a) - psi_s(b)
    }
}

/// `max |Σ_j φ_j(ξ) - 1|` over the given nonzero frequencies (the sum is
/// taken over every j whose window meets ξ).
pub fn partition_residual(xis: &[Vec<f64>]) -> f64 {
    xis.iter()
        .map(|xi| {
            let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let jmax = (r.max(1.0).log2().ceil() as u32) + 2;
            let s: f64 = (0..=jmax).map(|j| dyadic_phi(j, xi)).sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Quadrature nodes and weights (including `(2π)^{-n}`) on the support of
/// `φ_j`, resolving oscillations of frequency `|z|`.
fn annulus_rule(dim: usize, j: u32, zlen: f64) -> Vec<([f64; 2], f64)> {
    let lo = if j == 0 { 0.0 } else { 2f64.powi(j as i32 - 1) };
    let hi = 2f64.powi(j as i32 + 1);
    let width = (0.5 / zlen.max(1.0)).min(0.5);
    let panels = ((hi - lo) / width).ceil() as usize;
    let (gx, gw) = gauss_legendre(8);
    let dr = (hi - lo) / panels as f64;
    let mut radial = Vec::with_capacity(panels * 8);
    for p in 0..panels {
        let a = lo + p as f64 * dr;
        for (x, w) in gx.iter().zip(&gw) {
            radial.push((a + 0.5 * dr * (x + 1.0), 0.5 * dr * w));
        }
    }
    let mut out = Vec::new();
    if dim == 1 {
        let c = 1.0 / (2.0 * PI);
        for &(r, w) in &radial {
            out.push(([r, 0.0], w * c));
            out.push(([-r, 0.0], w * c));
        }
    } else {
        let m = 8 * (hi * zlen).ceil() as usize + 64;
        let c = 1.0 / (4.0 * PI * PI);
        let dt = 2.0 * PI / m as f64;
        for &(r, w) in &radial {
            for q in 0..m {
                let t = q as f64 * dt;
                out.push(([r * t.cos(), r * t.sin()], w * r * dt * c));
            }
        }
    }
    out
}

fn validate(a: &dyn PointAmplitude, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
    let n = a.dim();
    if x.len() != n || y.len() != n || z.len() != n {
        return Err(Error::Argument("point dimensions differ from the amplitude".into()));
    }
    let zlen = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if zlen == 0.0 {
        return Err(Error::Singularity("dyadic kernel at z = 0".into()));
    }
    Ok(zlen)
}

/// `k_{α,γ,j}(x, y, z) = ∫ e^{iz·ξ} (x-y)^{α+γ} a(x, y, ξ) φ_j(ξ) đξ`,
/// with `a` playing the role of the Taylor remainder `r_α`.
#[allow(clippy::too_many_arguments)]
pub fn kernel_dyadic(
    a: &dyn PointAmplitude,
    alpha: &[usize],
    gamma: &[usize],
    j: u32,
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Result<Complex64> {
    let zlen = validate(a, x, y, z)?;
    let n = a.dim();
    let mut pre = 1.0;
    for k in 0..n {
        let e = alpha.get(k).copied().unwrap_or(0) + gamma.get(k).copied().unwrap_or(0);
        pre *= (x[k] - y[k]).powi(e as i32);
    }
    if pre == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, w) in annulus_rule(n, j, zlen) {
        let xi = &xi[..n];
        let phi = dyadic_phi(j, xi);
        if phi == 0.0 {
            continue;
        }
        let phase: f64 = z.iter().zip(xi).map(|(a, b)| a * b).sum();
        acc += Complex64::from_polar(1.0, phase) * a.value(x, y, xi) * (phi * w);
    }
    Ok(acc * pre)
}

/// Decay of the dyadic pieces against the integration-by-parts bound.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DecayStudy {
    pub js: Vec<u32>,
    /// `|k_j|` by direct quadrature.
    pub kernel: Vec<f64>,
    /// `|z|^{-N} ∫ |L^N(a φ_j)| đξ` with `L = ∂_ξ` (1D) or `-Δ_ξ` applied N/2 times (2D).
    pub bound: Vec<f64>,
    pub derivatives: usize,
    /// `n + m - N`.
    pub predicted_slope: f64,
    pub bound_slope: f64,
    pub kernel_slope: f64,
    pub kernel_below_bound: bool,
}

impl DecayStudy {
    /// Relative deviation of the measured bound slope from the prediction.
    pub fn slope_error(&self) -> f64 {
        ((self.bound_slope - self.predicted_slope) / self.predicted_slope).abs()
    }
}

fn ls_slope(js: &[u32], v: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = js
        .iter()
        .zip(v)
        .filter(|(_, v)| **v > 0.0)
        .map(|(&j, &v)| (j as f64, v.log2()))
        .collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Kernel sizes and integration-by-parts bounds for `j ∈ js`.
pub fn dyadic_decay_study(
    a: &dyn PointAmplitude,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    derivatives: usize,
    js: &[u32],
) -> Result<DecayStudy> {
    let zlen = validate(a, x, y, z)?;
    let n = a.dim();
    if derivatives > 4 || (n == 2 && derivatives % 2 == 1) {
        return Err(Error::Capability(
            "derivative order must be <= 4 (and even in two dimensions)".into(),
        ));
    }
    if js.contains(&0) {
        return Err(Error::Argument("decay study starts at j = 1".into()));
    }
    let mut kernel = Vec::new();
    let mut bound = Vec::new();
    for &j in js {
        kernel.push(kernel_dyadic(a, &[], &[], j, x, y, z)?.norm());
        let mut acc = 0.0;
        for (xi, w) in annulus_rule(n, j, 1.0) {
            let xi = &xi[..n];
            let aj = a
                .xi_jet(x, y, xi)
                .ok_or_else(|| Error::Capability(format!("amplitude '{}' has no ξ-jets", a.name())))?;
            let prod = aj * dyadic_phi_jet(j, xi);
            let d = if n == 1 {
                prod.derivative(derivatives, 0)
            } else {
                match derivatives {
                    0 => prod.value(),
                    2 => -(prod.derivative(2, 0) + prod.derivative(0, 2)),
                    _ => prod.derivative(4, 0) + prod.derivative(0, 4) + prod.derivative(2, 2) * 2.0,
                }
            };
            acc += d.norm() * w;
        }
        bound.push(acc / zlen.powi(derivatives as i32));
    }
    let predicted_slope = n as f64 + a.order() - derivatives as f64;
    let bound_slope = ls_slope(js, &bound);
    let kernel_slope = ls_slope(js, &kernel);
    let kernel_below_bound = kernel.iter().zip(&bound).all(|(k, b)| *k <= b * (1.0 + 1e-6) + 1e-14);
    Ok(DecayStudy {
        js: js.to_vec(),
        kernel,
        bound,
        derivatives,
        predicted_slope,
        bound_slope,
        kernel_slope,
        kernel_below_bound,
    })
}
