//! Closed boundary curves in the plane and boundary chart atlases.

use super::{BoundaryFunction, CubicSpline, Point};
use crate::cutoff::{bump, plateau};
use crate::error::{Error, Result};
use crate::exec;
use crate::quadrature::gauss_legendre_unit;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Write};

#[derive(Clone, Debug)]
enum CurveKind {
    Ellipse { a1: f64, a2: f64 },
    Spline { x: CubicSpline, y: CubicSpline },
}

/// Counterclockwise closed curve parameterized over `t ∈ [0, 1)`.
#[derive(Clone, Debug)]
pub struct ClosedCurve {
    pub name: String,
    kind: CurveKind,
    /// Largest gap between the input samples, for curves built from points.
    pub raw_spacing: Option<f64>,
    /// Cumulative arclength at `t = k / ARC_TABLE`.
    arc: Vec<f64>,
}

const ARC_TABLE: usize = 2048;
/// Polyline resolution of nearest-point searches.
const SEARCH_SAMPLES: usize = 4096;

fn norm(v: Point) -> f64 {
    v[0].hypot(v[1])
}

impl ClosedCurve {
    fn with_kind(name: String, kind: CurveKind, raw_spacing: Option<f64>) -> Self {
        let mut c = ClosedCurve {
            name,
            kind,
            raw_spacing,
            arc: Vec::new(),
        };
        let (nodes, weights) = gauss_legendre_unit(8);
        let mut arc = vec![0.0; ARC_TABLE + 1];
        for k in 0..ARC_TABLE {
            let (t0, dt) = (k as f64 / ARC_TABLE as f64, 1.0 / ARC_TABLE as f64);
            let seg: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(s, w)| w * norm(c.eval(t0 + s * dt)[1]) * dt)
                .sum();
            arc[k + 1] = arc[k] + seg;
        }
        c.arc = arc;
        c
    }

    pub fn ellipse(a1: f64, a2: f64) -> Result<Self> {
        if !(a1 > 0.0 && a2 > 0.0) {
            return Err(Error::Argument("ellipse semi-axes must be positive".into()));
        }
        Ok(Self::with_kind(format!("ellipse({a1},{a2})"), CurveKind::Ellipse { a1, a2 }, None))
    }

    pub fn circle(r: f64) -> Result<Self> {
        let mut c = Self::ellipse(r, r)?;
        c.name = format!("circle({r})");
        Ok(c)
    }

    /// Periodic cubic spline through `points` (first = last) at parameters
    /// `ts` (increasing, rescaled to `[0, 1]`); reoriented counterclockwise.
    pub fn from_samples(name: impl Into<String>, ts: &[f64], points: &[Point]) -> Result<Self> {
        let n = points.len();
        if n < 5 || ts.len() != n {
            return Err(Error::Argument("a closed curve needs at least 4 distinct samples".into()));
        }
        let (first, last) = (points[0], points[n - 1]);
        if norm([first[0] - last[0], first[1] - last[1]]) > 1e-12 * (1.0 + norm(first)) {
            return Err(Error::Format("closed curve: first and last points differ".into()));
        }
        let area: f64 = points.windows(2).map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1]).sum();
        let (t0, t1) = (ts[0], ts[n - 1]);
        let mut knots: Vec<f64> = ts.iter().map(|t| (t - t0) / (t1 - t0)).collect();
        let mut pts = points.to_vec();
        if area < 0.0 {
            pts.reverse();
            knots = knots.iter().rev().map(|t| 1.0 - t).collect();
        }
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
        let mut xs_closed = xs;
        let mut ys_closed = ys;
        xs_closed[n - 1] = xs_closed[0];
        ys_closed[n - 1] = ys_closed[0];
        let spacing = pts.windows(2).map(|w| norm([w[1][0] - w[0][0], w[1][1] - w[0][1]])).fold(0.0, f64::max);
        Ok(Self::with_kind(
            name.into(),
            CurveKind::Spline {
                x: CubicSpline::periodic(knots.clone(), xs_closed)?,
                y: CubicSpline::periodic(knots, ys_closed)?,
            },
            Some(spacing),
        ))
    }

    /// `[γ(t), γ'(t), γ''(t)]`.
    pub fn eval(&self, t: f64) -> [Point; 3] {
        match &self.kind {
            CurveKind::Ellipse { a1, a2 } => {
                let th = 2.0 * PI * t;
                let w = 2.0 * PI;
                let (s, c) = th.sin_cos();
                [[a1 * c, a2 * s], [-a1 * w * s, a2 * w * c], [-a1 * w * w * c, -a2 * w * w * s]]
            }
            CurveKind::Spline { x, y } => {
                let (dx, dy) = (x.eval(t), y.eval(t));
                [[dx[0], dy[0]], [dx[1], dy[1]], [dx[2], dy[2]]]
            }
        }
    }

    pub fn point(&self, t: f64) -> Point {
        self.eval(t)[0]
    }

    /// Outward unit normal (the curve runs counterclockwise).
    pub fn outer_normal(&self, t: f64) -> Point {
        let d = self.eval(t)[1];
        let l = norm(d);
        [d[1] / l, -d[0] / l]
    }

    pub fn perimeter(&self) -> f64 {
        self.arc[ARC_TABLE]
    }

    /// Arclength from `t = 0`, for `t ∈ [0, 1]`.
    pub fn arclength(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        let k = ((t * ARC_TABLE as f64).floor() as usize).min(ARC_TABLE - 1);
        let t0 = k as f64 / ARC_TABLE as f64;
        let (nodes, weights) = gauss_legendre_unit(8);
        let dt = t - t0;
        let part: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(s, w)| w * norm(self.eval(t0 + s * dt)[1]) * dt)
            .sum();
        self.arc[k] + part
    }

    /// Parameter at arclength `s` (taken modulo the perimeter).
    pub fn param_at(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.perimeter());
        let k = self.arc.partition_point(|&a| a <= s).clamp(1, ARC_TABLE) - 1;
        let mut t = (k as f64 + (s - self.arc[k]) / (self.arc[k + 1] - self.arc[k])) / ARC_TABLE as f64;
        for _ in 0..20 {
            let r = self.arclength(t) - s;
            let step = r / norm(self.eval(t)[1]);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        t
    }

    /// Nearest boundary parameter and unsigned distance from `x`.
    pub fn nearest(&self, x: Point) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY);
        for k in 0..SEARCH_SAMPLES {
            let t = k as f64 / SEARCH_SAMPLES as f64;
            let p = self.point(t);
            let d = norm([p[0] - x[0], p[1] - x[1]]);
            if d < best.1 {
                best = (t, d);
            }
        }
        // Newton on φ(t) = |γ(t) - x|²/2, kept within the bracketing cell
        let cell = 1.0 / SEARCH_SAMPLES as f64;
        let (lo, hi) = (best.0 - cell, best.0 + cell);
        let mut t = best.0;
        for _ in 0..30 {
            let [p, d1, d2] = self.eval(t);
            let r = [p[0] - x[0], p[1] - x[1]];
            let g = r[0] * d1[0] + r[1] * d1[1];
            let h = d1[0] * d1[0] + d1[1] * d1[1] + r[0] * d2[0] + r[1] * d2[1];
            if h <= 0.0 {
                break;
            }
            let next = (t - g / h).clamp(lo, hi);
            if (next - t).abs() < 1e-16 {
                t = next;
                break;
            }
            t = next;
        }
        let p = self.point(t);
        let d = norm([p[0] - x[0], p[1] - x[1]]);
        if d <= best.1 {
            (t.rem_euclid(1.0), d)
        } else {
            best
        }
    }

    /// Signed distance, positive inside.
    pub fn signed_distance(&self, x: Point) -> f64 {
        let (t, d) = self.nearest(x);
        let p = self.point(t);
        let nu = self.outer_normal(t);
        if (x[0] - p[0]) * nu[0] + (x[1] - p[1]) * nu[1] > 0.0 {
            -d
        } else {
            d
        }
    }

    /// `m + 1` samples `(t, point)` with the first repeated at the end.
    pub fn samples(&self, m: usize) -> Vec<(f64, Point)> {
        (0..=m)
            .map(|k| {
                let t = k as f64 / m as f64;
                (t, self.point(if k == m { 0.0 } else { t }))
            })
            .collect()
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for k in 0..SEARCH_SAMPLES {
            let p = self.point(k as f64 / SEARCH_SAMPLES as f64);
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }
}

/// Writes `t,x1,x2` rows of a closed curve (first point repeated last).
pub fn write_boundary_csv<W: Write>(curve: &ClosedCurve, m: usize, mut w: W) -> Result<()> {
    writeln!(w, "t,x1,x2")?;
    for (t, p) in curve.samples(m) {
        writeln!(w, "{t:.17e},{:.17e},{:.17e}", p[0], p[1])?;
    }
    Ok(())
}

/// Reads a `t,x1,x2` boundary file; errors name the offending line.
pub fn read_boundary_csv<R: BufRead>(name: &str, r: R) -> Result<ClosedCurve> {
    let mut ts = Vec::new();
    let mut pts = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        if k == 0 {
            if line.trim() != "t,x1,x2" {
                return Err(Error::Format(format!("line 1: expected header 't,x1,x2', found '{}'", line.trim())));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!("line {lineno}: expected 3 fields, found {}", fields.len())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Format(format!("line {lineno}: '{s}' is not a number")))
        };
        ts.push(parse(fields[0])?);
        pts.push([parse(fields[1])?, parse(fields[2])?]);
    }
    ClosedCurve::from_samples(name, &ts, &pts)
}

/// One boundary chart: `R(x - center)` maps the boundary near `center` onto
/// the graph of `gamma` over `[-radius, radius]`, with the domain above.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Chart {
    pub center: Point,
    /// Rows: unit tangent, inward normal.
    pub rotation: [[f64; 2]; 2],
    pub radius: f64,
    /// Arclength position of the center.
    pub arclength: f64,
    pub gamma: CubicSpline,
    pub fit_residual: f64,
}

impl Chart {
    pub fn to_local(&self, x: Point) -> Point {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        let r = &self.rotation;
        [r[0][0] * d[0] + r[0][1] * d[1], r[1][0] * d[0] + r[1][1] * d[1]]
    }

    pub fn boundary_function(&self) -> BoundaryFunction {
        let s = self.gamma.clone();
        BoundaryFunction::new("chart graph", 1.0, move |x| s.eval(x))
    }
}

/// Boundary charts plus an interior chart, with a smooth partition of
/// unity on the domain.
#[derive(Clone, Debug)]
pub struct ChartAtlas {
    pub curve: ClosedCurve,
    pub charts: Vec<Chart>,
    /// Arclength half-width of the support of each boundary weight.
    pub weight_half_width: f64,
    /// Width of the boundary collar covered by the boundary charts.
    pub collar: f64,
    /// `max |Σϱ - 1|` over the validation samples.
    pub partition_residual: f64,
}

#[derive(Serialize, Deserialize)]
struct AtlasDocument {
    curve: String,
    perimeter: f64,
    collar: f64,
    weight_half_width: f64,
    charts: Vec<Chart>,
}

/// Arclength half-width of a chart's fitted arc, per unit spacing.
const FIT_OVERLAP: f64 = 0.75;
/// Arclength half-width of a partition weight, per unit spacing.
const WEIGHT_OVERLAP: f64 = 0.6;
/// Knots of each fitted chart graph.
const FIT_KNOTS: usize = 1025;
/// Smallest admissible `dx̃₁/ds` along a fitted arc.
const MIN_TANGENT: f64 = 0.1;
/// Largest admissible graph-fit residual.
pub const FIT_TOL: f64 = 1e-8;

fn frame(curve: &ClosedCurve, t: f64) -> [[f64; 2]; 2] {
    let nu = curve.outer_normal(t);
    let mut tau = [-nu[1], nu[0]];
    if tau[0] < -1e-12 || (tau[0].abs() <= 1e-12 && tau[1] < 0.0) {
        tau = [-tau[0], -tau[1]];
    }
    [tau, [-nu[0], -nu[1]]]
}

fn fit_chart(curve: &ClosedCurve, index: usize, spacing: f64) -> Result<Chart> {
    let s0 = index as f64 * spacing;
    let t0 = curve.param_at(s0);
    let center = curve.point(t0);
    let rotation = frame(curve, t0);
    let mut chart = Chart {
        center,
        rotation,
        radius: 0.0,
        arclength: s0,
        gamma: CubicSpline::clamped(vec![-1.0, 1.0], vec![0.0, 0.0], 0.0, 0.0)?,
        fit_residual: 0.0,
    };
    let half = FIT_OVERLAP * spacing;
    let samples = 1024;
    // signed direction of x̃₁ along increasing arclength
    let along: Vec<(f64, Point)> = (0..=samples)
        .map(|k| {
            let t = curve.param_at(s0 - half + 2.0 * half * k as f64 / samples as f64);
            (t, chart.to_local(curve.point(t)))
        })
        .collect();
    let dir = if along[samples].1[0] > along[0].1[0] { 1.0 } else { -1.0 };
    for &(t, _) in &along {
        let d = curve.eval(t)[1];
        let l = norm(d);
        let dx1 = (rotation[0][0] * d[0] + rotation[0][1] * d[1]) / l;
        if dir * dx1 < MIN_TANGENT {
            return Err(Error::Geometry(format!(
                "chart {index}: boundary fails the vertical-line test (arc too long for {} charts); increase the chart count",
                (curve.perimeter() / spacing).round()
            )));
        }
    }
    let radius = along[0].1[0].abs().min(along[samples].1[0].abs());
    chart.radius = radius;
    // parameter with x̃₁ = s by bisection on the monotone arc, then Newton
    let (ta, tb) = (along[0].0, along[samples].0);
    let local = chart.clone();
    let tb = if tb < ta { tb + 1.0 } else { tb };
    let local_at = |s: f64| -> (f64, f64) {
        let (mut lo, mut hi) = (ta, tb);
        let x1 = |t: f64| dir * local.to_local(curve.point(t))[0];
        let target = dir * s;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if x1(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..3 {
            let d = curve.eval(t)[1];
            let v = rotation[0][0] * d[0] + rotation[0][1] * d[1];
            t -= (local.to_local(curve.point(t))[0] - s) / v;
        }
        let q = local.to_local(curve.point(t));
        let d = curve.eval(t)[1];
        let slope = (rotation[1][0] * d[0] + rotation[1][1] * d[1]) / (rotation[0][0] * d[0] + rotation[0][1] * d[1]);
        (q[1], slope)
    };
    let knots: Vec<f64> = (0..FIT_KNOTS)
        .map(|k| -radius + 2.0 * radius * k as f64 / (FIT_KNOTS - 1) as f64)
        .collect();
    let fitted: Vec<(f64, f64)> = knots.iter().map(|&s| local_at(s)).collect();
    let values: Vec<f64> = fitted.iter().map(|v| v.0).collect();
    chart.gamma = CubicSpline::clamped(knots.clone(), values, fitted[0].1, fitted[FIT_KNOTS - 1].1)?;
    chart.fit_residual = knots
        .windows(2)
        .map(|w| {
            let s = 0.5 * (w[0] + w[1]);
            (chart.gamma.eval(s)[0] - local_at(s).0).abs()
        })
        .fold(0.0, f64::max);
    if chart.fit_residual > FIT_TOL {
        return Err(Error::Geometry(format!(
            "chart {index}: graph fit residual {:.3e} exceeds {FIT_TOL:e}",
            chart.fit_residual
        )));
    }
    Ok(chart)
}

impl ChartAtlas {
    /// `[ϱ_1, ..., ϱ_K, ϱ_interior]` at `x`, plus the boundary distance.
    pub fn weights(&self, x: Point) -> Vec<f64> {
        let (t, d) = self.curve.nearest(x);
        let s = self.curve.arclength(t);
        let p = self.curve.perimeter();
        let near = plateau(d, 0.5 * self.collar, self.collar);
        let mut w: Vec<f64> = self
            .charts
            .iter()
            .map(|c| {
                let ds = (s - c.arclength + 0.5 * p).rem_euclid(p) - 0.5 * p;
                bump(ds / self.weight_half_width) * near
            })
            .collect();
        w.push(1.0 - plateau(d, 0.25 * self.collar, 0.5 * self.collar));
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        w
    }

    /// Boundary chart carrying the largest weight at the boundary point
    /// nearest to `x`.
    pub fn dominant_chart(&self, x: Point) -> usize {
        let (t, _) = self.curve.nearest(x);
        let s = self.curve.arclength(t);
        let p = self.curve.perimeter();
        let mut best = (0, f64::INFINITY);
        for (k, c) in self.charts.iter().enumerate() {
            let ds = ((s - c.arclength + 0.5 * p).rem_euclid(p) - 0.5 * p).abs();
            if ds < best.1 {
                best = (k, ds);
            }
        }
        best.0
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = AtlasDocument {
            curve: self.curve.name.clone(),
            perimeter: self.curve.perimeter(),
            collar: self.collar,
            weight_half_width: self.weight_half_width,
            charts: self.charts.clone(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))
    }

    /// Charts stored in an atlas document.
    pub fn charts_from_json(s: &str) -> Result<Vec<Chart>> {
        let doc: AtlasDocument = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        Ok(doc.charts)
    }
}

/// Charts centered uniformly by arclength; each graph is fitted in its
/// rotated frame and validated, then the partition of unity is checked on
/// a lattice of interior points.
pub fn build_atlas(curve: &ClosedCurve, chart_count: usize) -> Result<ChartAtlas> {
    if chart_count < 2 {
        return Err(Error::Argument("an atlas needs at least two boundary charts".into()));
    }
    let spacing = curve.perimeter() / chart_count as f64;
    let charts = exec::map_indexed(chart_count, |i| fit_chart(curve, i, spacing))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let weight_half_width = WEIGHT_OVERLAP * spacing;
    let min_radius = charts.iter().map(|c| c.radius).fold(f64::INFINITY, f64::min);
    let (lo, hi) = curve.bounding_box();
    let inradius = 0.5 * (hi[0] - lo[0]).min(hi[1] - lo[1]);
    let collar = 0.25 * min_radius.min(inradius);
    let mut atlas = ChartAtlas {
        curve: curve.clone(),
        charts,
        weight_half_width,
        collar,
        partition_residual: 0.0,
    };
    let m = 41;
    let pts: Vec<Point> = (0..m * m)
        .map(|k| {
            let (i, j) = (k / m, k % m);
            [
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / m as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / m as f64,
            ]
        })
        .filter(|p| curve.signed_distance(*p) > 0.0)
        .collect();
    let residuals = exec::map_indexed(pts.len(), |k| (atlas.weights(pts[k]).iter().sum::<f64>() - 1.0).abs());
    atlas.partition_residual = residuals.into_iter().fold(0.0, f64::max);
    if !(atlas.partition_residual < 1e-10) {
        return Err(Error::Geometry(format!(
            "partition of unity residual {:.3e}",
            atlas.partition_residual
        )));
    }
    Ok(atlas)
}
