//! Distance functions `d₀` (Euclidean, capped inland) and `d` (regularized).

use super::{BoundaryFunction, ClosedCurve, Point};
use crate::cutoff::plateau;
use crate::error::{Error, Result};
use crate::grid::ellipse_distance;

/// Domains with a computable boundary distance.
#[derive(Clone, Debug)]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Disk { radius: f64 },
    Ellipse { a1: f64, a2: f64 },
    /// `{x₂ > γ(x₁)}`.
    CurvedHalfspace { gamma: BoundaryFunction },
    Curve(ClosedCurve),
}

/// Both distance functions of a domain.
#[derive(Clone, Debug)]
pub struct DistanceFunctions {
    pub spec: DomainSpec,
    /// `d₀` is exact up to `cap/2` and levels off smoothly at `cap`.
    pub cap: f64,
    /// Halfspaces: beyond `|x₂| = far` the vertical distance switches to
    /// `x₂ + c1`.
    pub far: f64,
    pub c1: f64,
}

/// `d` for `d <= c/2`, then a smooth monotone approach to `c`.
fn capped(d: f64, c: f64) -> f64 {
    if !c.is_finite() || d <= 0.5 * c {
        d
    } else {
        0.5 * c + 0.5 * c * ((d - 0.5 * c) / (0.5 * c)).tanh()
    }
}

/// Nearest point of the graph of `γ` to `x` and the distance.
fn graph_distance(gamma: &BoundaryFunction, x: &[f64], h: f64) -> f64 {
    let vertical = (x[1] - gamma.value(x[0])).abs();
    if vertical == 0.0 {
        return 0.0;
    }
    let step = (h / 8.0).min(vertical / 8.0).max(1e-6);
    let m = ((2.0 * vertical / step).ceil() as usize).max(2);
    let mut best = (x[0], vertical);
    for k in 0..=m {
        let s = x[0] - vertical + 2.0 * vertical * k as f64 / m as f64;
        let d = (s - x[0]).hypot(gamma.value(s) - x[1]);
        if d < best.1 {
            best = (s, d);
        }
    }
    let mut s = best.0;
    for _ in 0..30 {
        let g = gamma.derivatives(s);
        let r = g[0] - x[1];
        let d1 = (s - x[0]) + r * g[1];
        let d2 = 1.0 + g[1] * g[1] + r * g[2];
        if d2 <= 0.0 {
            break;
        }
        let next = s - d1 / d2;
        if (next - s).abs() < 1e-15 {
            s = next;
            break;
        }
        s = next;
    }
    let refined = (s - x[0]).hypot(gamma.value(s) - x[1]);
    refined.min(best.1)
}

impl DistanceFunctions {
    /// Exact Euclidean distance, signed positive inside.
    pub fn euclidean(&self, x: &[f64]) -> f64 {
        match &self.spec {
            DomainSpec::Interval { a, b } => (x[0] - a).min(b - x[0]),
            DomainSpec::Disk { radius } => radius - x[0].hypot(x[1]),
            DomainSpec::Ellipse { a1, a2 } => {
                let d = ellipse_distance(*a1, *a2, x);
                if (x[0] / a1).powi(2) + (x[1] / a2).powi(2) < 1.0 {
                    d
                } else {
                    -d
                }
            }
            DomainSpec::CurvedHalfspace { gamma } => {
                let d = graph_distance(gamma, x, 1e-2);
                if x[1] > gamma.value(x[0]) {
                    d
                } else {
                    -d
                }
            }
            DomainSpec::Curve(c) => c.signed_distance([x[0], x[1]]),
        }
    }

    /// `d₀`: the Euclidean distance, capped inland.
    pub fn d0(&self, x: &[f64]) -> f64 {
        let d = self.euclidean(x);
        if d > 0.0 {
            capped(d, self.cap)
        } else {
            d
        }
    }

    /// `d`: vertical distance with far-field switch for halfspaces, `d₀`
    /// otherwise.
    pub fn d(&self, x: &[f64]) -> f64 {
        match &self.spec {
            DomainSpec::CurvedHalfspace { gamma } => {
                let near = plateau(x[1].abs(), self.far, 2.0 * self.far);
                x[1] - near * gamma.value(x[0]) + (1.0 - near) * self.c1
            }
            _ => self.d0(x),
        }
    }

    /// `C = max(d/d₀, d₀/d)` over the sample points inside the domain.
    pub fn equivalence_constant(&self, points: &[Vec<f64>]) -> f64 {
        points
            .iter()
            .filter_map(|x| {
                let (a, b) = (self.d0(x), self.d(x));
                (a > 0.0 && b > 0.0).then(|| (a / b).max(b / a))
            })
            .fold(1.0, f64::max)
    }
}

/// Distance functions of `spec` for a grid of spacing `h`. Curves built
/// from samples must be resolved at that scale.
pub fn distance_function(spec: DomainSpec, h: f64) -> Result<DistanceFunctions> {
    if !(h > 0.0) {
        return Err(Error::Argument("grid spacing must be positive".into()));
    }
    let cap = match &spec {
        DomainSpec::Interval { a, b } => {
            if !(b > a) {
                return Err(Error::Argument("interval needs a < b".into()));
            }
            0.5 * (b - a)
        }
        DomainSpec::Disk { radius } => *radius,
        DomainSpec::Ellipse { a1, a2 } => a1.min(*a2),
        DomainSpec::CurvedHalfspace { .. } => f64::INFINITY,
        DomainSpec::Curve(c) => {
            if let Some(gap) = c.raw_spacing {
                if gap > 2.0 * h {
                    return Err(Error::Geometry(format!(
                        "boundary under-resolved: adjacent samples {gap:.4} apart exceed two cells ({:.4})",
                        2.0 * h
                    )));
                }
            }
            let (lo, hi) = c.bounding_box();
            let center: Point = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
            c.signed_distance(center).max(0.5 * (hi[0] - lo[0]).min(hi[1] - lo[1]) * 0.5)
        }
    };
    Ok(DistanceFunctions {
        spec,
        cap,
        far: 4.0,
        c1: 0.0,
    })
}
