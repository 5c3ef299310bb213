//! Weighted boundary trace `γ₀^μ u = Γ(μ+1)(u/d^μ)|_∂Ω`.

use super::spaces::{interpolate, inward_normal};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{DomainKind, DomainMask};
use crate::grid::GridFunction;
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;

/// Depths (in cells) of the primary extrapolation.
pub const TRACE_DEPTHS: [f64; 3] = [4.0, 8.0, 16.0];
/// Depths of the companion extrapolation used for the spread.
pub const TRACE_CHECK_DEPTHS: [f64; 3] = [8.0, 16.0, 32.0];

#[derive(Clone, Debug, Serialize)]
pub struct TraceSample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub value: Complex64,
    /// Difference between the two extrapolants (times Γ(μ+1)).
    pub spread: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub mu: f64,
    pub tolerance: f64,
    pub samples: Vec<TraceSample>,
}

impl TraceReport {
    pub fn flagged(&self) -> usize {
        self.samples.iter().filter(|s| s.flagged).count()
    }
}

/// Boundary points with inward unit normals.
pub fn boundary_samples(mask: &DomainMask) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let grid = mask.grid;
    let n = grid.n;
    Ok(match (&mask.kind, grid.dim) {
        (DomainKind::Interval { a, b }, 1) => vec![(vec![*a], vec![1.0]), (vec![*b], vec![-1.0])],
        (DomainKind::Halfspace, 1) => vec![(vec![0.0], vec![1.0])],
        (DomainKind::Halfspace, 2) => (0..n).map(|k| (vec![grid.node_1d(k), 0.0], vec![0.0, 1.0])).collect(),
        (DomainKind::Graph { gamma, .. }, 2) => (0..n)
            .map(|k| {
                let x1 = grid.node_1d(k);
                let p = vec![x1, gamma(&[x1])];
                let nu = inward_normal(&mask.kind, &p);
                (p, nu)
            })
            .collect(),
        (DomainKind::Ellipse { a1, a2 }, 2) => (0..4 * n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / (4 * n) as f64;
                let p = vec![a1 * t.cos(), a2 * t.sin()];
                let g = [-t.cos() / a1, -t.sin() / a2];
                let l = (g[0] * g[0] + g[1] * g[1]).sqrt();
                (p, vec![g[0] / l, g[1] / l])
            })
            .collect(),
        (kind, d) => return Err(Error::Geometry(format!("no boundary sampling for {kind:?} in {d}D"))),
    })
}

/// Fits `q(δ) = q₀ + c₁δ + c₂h/δ` through three depths; returns `q₀`.
fn extrapolate(depths: &[f64; 3], values: &[Complex64; 3], h: f64) -> Option<Complex64> {
    let m = Matrix3::from_fn(|r, c| match c {
        0 => 1.0,
        1 => depths[r],
        _ => h / depths[r],
    });
    let inv = m.try_inverse()?;
    let re = inv * Vector3::new(values[0].re, values[1].re, values[2].re);
    let im = inv * Vector3::new(values[0].im, values[1].im, values[2].im);
    Some(Complex64::new(re[0], im[0]))
}

/// `γ₀^μ u` at the boundary samples of the domain, extrapolating `u/d^μ`
/// along the inward normal from depths {4h, 8h, 16h}. A sample is flagged
/// when the extrapolant from {8h, 16h, 32h} differs by more than
/// `tol·max(1, |value|)`.
pub fn weighted_trace(u: &GridFunction, mu: f64, mask: &DomainMask, tol: f64) -> Result<TraceReport> {
    mask.grid.check_same(&u.grid)?;
    let grid = u.grid;
    let h = grid.spacing();
    let quotient: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let d = mask.dist[i];
            if d > 0.0 {
                u.values[i] / d.powf(mu)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let g = gamma(mu + 1.0);
    let pts = boundary_samples(mask)?;
    let depth_limit = TRACE_CHECK_DEPTHS[2] * h;
    let samples = exec::map_indexed(pts.len(), |k| {
        let (p, nu) = &pts[k];
        let at = |cells: f64| {
            let y: Vec<f64> = p.iter().zip(nu).map(|(a, b)| a + cells * h * b).collect();
            let d = mask.kind.signed_distance(&y);
            (d, interpolate(&grid, &quotient, &y))
        };
        let run = |cells: &[f64; 3]| {
            let mut ds = [0.0; 3];
            let mut qs = [Complex64::new(0.0, 0.0); 3];
            for (j, c) in cells.iter().enumerate() {
                let (d, q) = at(*c);
                ds[j] = d;
                qs[j] = q;
            }
            if ds.iter().any(|&d| !(d > 0.0)) {
                return None;
            }
            extrapolate(&ds, &qs, h)
        };
        let deep_enough = at(TRACE_CHECK_DEPTHS[2]).0 >= 0.5 * depth_limit;
        match (run(&TRACE_DEPTHS), run(&TRACE_CHECK_DEPTHS)) {
            (Some(a), Some(b)) if deep_enough => {
                let value = a * g;
                let spread = (a - b).norm() * g;
                TraceSample {
                    point: p.clone(),
                    normal: nu.clone(),
                    value,
                    spread,
                    flagged: !(spread <= tol * value.norm().max(1.0)),
                }
            }
            _ => TraceSample {
                point: p.clone(),
                normal: nu.clone(),
                value: Complex64::new(f64::NAN, f64::NAN),
                spread: f64::INFINITY,
                flagged: true,
            },
        }
    });
    Ok(TraceReport {
        mu,
        tolerance: tol,
        samples,
    })
}
