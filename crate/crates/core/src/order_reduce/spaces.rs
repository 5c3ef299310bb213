//! μ-transmission spaces `H_q^{μ(s)}`: regime, norms, membership and the
//! decomposition `u = w + d^μ e⁺v`.

use super::{apply_order_reducer, apply_order_reducer_filtered};
use crate::cutoff::plateau;
use crate::error::{Error, Result};
use crate::grid::{DomainKind, DomainMask};
use crate::grid::{sobolev_norm, GridFunction, TorusGrid};
use crate::symbols::Sign;
use num_complex::Complex64;
use serde::Serialize;

/// Width of the excluded boundary collar in `decompose`, in cells.
pub const COLLAR_CELLS: f64 = 4.0;
/// Collar excluded from the outside residual of the membership check.
pub const MEMBERSHIP_COLLAR: f64 = 0.05;
/// Default per-doubling growth of the discrete norm that counts as divergence.
pub const DEFAULT_GROWTH_THRESHOLD: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `s <= μ - 1/q'`: the space is `Ḣ^s_q`.
    Supported,
    /// `s > μ - 1/q'`.
    Reduced,
}

#[derive(Clone, Debug)]
pub struct TransmissionSpaceSpec {
    pub mu: f64,
    pub s: f64,
    pub q: f64,
    pub domain: DomainMask,
}

impl TransmissionSpaceSpec {
    pub fn new(mu: f64, s: f64, q: f64, domain: DomainMask) -> Result<Self> {
        if !(mu > -1.0) {
            return Err(Error::Argument(format!("μ must exceed -1, got {mu}")));
        }
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::Argument(format!("q must lie in (1, ∞), got {q}")));
        }
        if !s.is_finite() {
            return Err(Error::Argument("s must be finite".into()));
        }
        Ok(TransmissionSpaceSpec { mu, s, q, domain })
    }

    /// `q' = q/(q-1)`.
    pub fn q_dual(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    pub fn regime(&self) -> Regime {
        if self.s <= self.mu - 1.0 / self.q_dual() {
            Regime::Supported
        } else {
            Regime::Reduced
        }
    }
}

fn interval_partition(a: f64, b: f64, x: f64) -> f64 {
    let m = 0.5 * (a + b);
    let w = 0.3 * 0.5 * (b - a);
    let t = ((x - (m - w)) / (2.0 * w)).clamp(0.0, 1.0);
    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// `Ξ^μ u` adapted to the domain: `Ξ₊^μ` for a halfspace, and for an
/// interval `Ξ₊^μ(ρu) + Ξ₋^μ((1-ρ)u)` with `ρ` a smooth step from 1 to 0
/// across the middle 30% of the interval.
pub fn domain_reducer(mu: f64, mask: &DomainMask, u: &GridFunction, filtered: bool) -> Result<GridFunction> {
    mask.grid.check_same(&u.grid)?;
    let apply = |sign: Sign, f: &GridFunction| {
        if filtered {
            apply_order_reducer_filtered(mu, sign, f)
        } else {
            apply_order_reducer(mu, sign, f)
        }
    };
    match &mask.kind {
        DomainKind::Halfspace => Ok(apply(Sign::Plus, u)),
        DomainKind::Interval { a, b } => {
            let (a, b) = (*a, *b);
            let left = u.mul_fn(|x| Complex64::new(interval_partition(a, b, x[0]), 0.0));
            let right = u.sub(&left)?;
            apply(Sign::Plus, &left).add(&apply(Sign::Minus, &right))
        }
        other => Err(Error::Capability(format!(
            "order reduction on {other:?} needs a coordinate change to a halfspace"
        ))),
    }
}

/// Sup of the filtered `Ξ^μ` pieces on the side where each one must vanish,
/// beyond the membership collar and within a quarter period of the boundary.
fn outside_leak(mu: f64, mask: &DomainMask, u: &GridFunction) -> Result<f64> {
    let grid = u.grid;
    let far = 0.25 * grid.length;
    let band = |i: usize| mask.dist[i] < -MEMBERSHIP_COLLAR && mask.dist[i] > -far;
    let sup = |v: &GridFunction, keep: &dyn Fn(usize) -> bool| {
        (0..grid.len())
            .filter(|&i| band(i) && keep(i))
            .map(|i| v.values[i].norm())
            .fold(0.0, f64::max)
    };
    match &mask.kind {
        DomainKind::Halfspace => Ok(sup(&apply_order_reducer_filtered(mu, Sign::Plus, u), &|_| true)),
        DomainKind::Interval { a, b } => {
            let (a, b) = (*a, *b);
            let left = u.mul_fn(|x| Complex64::new(interval_partition(a, b, x[0]), 0.0));
            let right = u.sub(&left)?;
            let vl = apply_order_reducer_filtered(mu, Sign::Plus, &left);
            let vr = apply_order_reducer_filtered(mu, Sign::Minus, &right);
            let nodes: Vec<f64> = (0..grid.len()).map(|i| grid.node_1d(i)).collect();
            Ok(sup(&vl, &|i| nodes[i] < a).max(sup(&vr, &|i| nodes[i] > b)))
        }
        other => Err(Error::Capability(format!(
            "order reduction on {other:?} needs a coordinate change to a halfspace"
        ))),
    }
}

/// Reflection of `x` across the nearest boundary point, with the distance
/// to the boundary; `None` for domains without a reflection.
fn reflect(kind: &DomainKind, grid: &TorusGrid, x: &[f64]) -> Option<(Vec<f64>, f64, f64)> {
    match kind {
        DomainKind::Interval { a, b } => {
            let len = b - a;
            let (r, d) = if x[0] < *a { (2.0 * a - x[0], a - x[0]) } else { (2.0 * b - x[0], x[0] - b) };
            Some((vec![r], d, len))
        }
        DomainKind::Halfspace => {
            let n = x.len();
            let mut r = x.to_vec();
            r[n - 1] = -x[n - 1];
            Some((r, -x[n - 1], 0.5 * grid.length))
        }
        _ => None,
    }
}

/// Linear (1D) or bilinear (2D) interpolation of grid values at `p`,
/// periodic in every axis.
pub(crate) fn interpolate(grid: &TorusGrid, values: &[Complex64], p: &[f64]) -> Complex64 {
    let n = grid.n as i64;
    let h = grid.spacing();
    let mut base = [0i64; 2];
    let mut frac = [0.0; 2];
    for a in 0..grid.dim {
        let s = (p[a] + 0.5 * grid.length) / h;
        let f = s.floor();
        base[a] = f as i64;
        frac[a] = s - f;
    }
    let idx = |a: i64, b: i64| -> usize {
        if grid.dim == 1 {
            a.rem_euclid(n) as usize
        } else {
            (a.rem_euclid(n) * n + b.rem_euclid(n)) as usize
        }
    };
    if grid.dim == 1 {
        values[idx(base[0], 0)] * (1.0 - frac[0]) + values[idx(base[0] + 1, 0)] * frac[0]
    } else {
        let (i, j) = (base[0], base[1]);
        let (fx, fy) = (frac[0], frac[1]);
        values[idx(i, j)] * ((1.0 - fx) * (1.0 - fy))
            + values[idx(i + 1, j)] * (fx * (1.0 - fy))
            + values[idx(i, j + 1)] * ((1.0 - fx) * fy)
            + values[idx(i + 1, j + 1)] * (fx * fy)
    }
}

/// Discrete `‖f‖_{H^s_q(Ω)}` of the restriction of `f` to the domain.
/// For `-1/q' < s < 1/q` extension by zero is used (it is bounded there);
/// otherwise an even reflection across the boundary, tapered off at half
/// the domain width, which is bounded on `H^s` for `s < 3/2`.
pub fn restricted_sobolev_norm(f: &GridFunction, mask: &DomainMask, s: f64, q: f64) -> Result<f64> {
    let restricted = mask.restrict(f)?;
    let qd = q / (q - 1.0);
    if s < 1.0 / q && s > -1.0 / qd {
        return sobolev_norm(&restricted, s, q);
    }
    if s >= 1.5 {
        return Err(Error::Capability(format!(
            "restricted norms are implemented for s < 3/2, got {s}"
        )));
    }
    let grid = f.grid;
    let mut ext = restricted.values.clone();
    for i in 0..grid.len() {
        if mask.inside[i] {
            continue;
        }
        let x = grid.node(i);
        let (r, d, len) = reflect(&mask.kind, &grid, &x).ok_or_else(|| {
            Error::Capability(format!("no reflection extension for {:?}", mask.kind))
        })?;
        let taper = plateau(d, 0.25 * len, 0.5 * len);
        if taper > 0.0 {
            ext[i] = interpolate(&grid, &restricted.values, &r) * taper;
        }
    }
    sobolev_norm(&GridFunction::new(grid, ext)?, s, q)
}

/// `‖r⁺Ξ₊^μ u‖_{H^{s-μ}_q(Ω)}` (reduced regime only).
pub fn transmission_norm(u: &GridFunction, spec: &TransmissionSpaceSpec) -> Result<f64> {
    if spec.regime() == Regime::Supported {
        return Err(Error::Regime(format!(
            "s = {} <= μ - 1/q' = {}: use the plain Sobolev norm of the supported space",
            spec.s,
            spec.mu - 1.0 / spec.q_dual()
        )));
    }
    let v = domain_reducer(spec.mu, &spec.domain, u, false)?;
    restricted_sobolev_norm(&v, &spec.domain, spec.s - spec.mu, spec.q)
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub regime: Regime,
    /// Supported: `sup |u|` outside Ω. Reduced: sup of the filtered one-sided
    /// `Ξ±^μ` pieces outside Ω beyond the collar. Both relative to `‖u‖∞`.
    pub outside_residual: f64,
    /// `‖u‖_{H^s_q}` (supported) or the transmission norm (reduced).
    pub norm: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Single-grid membership check.
pub fn transmission_membership(u: &GridFunction, spec: &TransmissionSpaceSpec, tol: f64) -> Result<MembershipReport> {
    let mask = &spec.domain;
    mask.grid.check_same(&u.grid)?;
    let scale = u.sup_norm().max(f64::MIN_POSITIVE);
    let regime = spec.regime();
    let (outside_residual, norm) = match regime {
        Regime::Supported => {
            let out = (0..u.grid.len())
                .filter(|&i| !mask.inside[i])
                .map(|i| u.values[i].norm())
                .fold(0.0, f64::max);
            (out / scale, sobolev_norm(u, spec.s, spec.q)?)
        }
        Regime::Reduced => {
            (outside_leak(spec.mu, mask, u)? / scale, transmission_norm(u, spec)?)
        }
    };
    let pass = outside_residual <= tol && norm.is_finite();
    Ok(MembershipReport {
        regime,
        outside_residual,
        norm,
        tolerance: tol,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementStudy {
    pub ns: Vec<usize>,
    pub reports: Vec<MembershipReport>,
    /// Ratio of consecutive norms.
    pub growth: Vec<f64>,
    pub growth_threshold: f64,
    pub pass: bool,
}

/// Membership over a sequence of grids: the finest grid must pass the
/// single-grid check and the norm must not diverge (growth per doubling at
/// or above the threshold counts as divergence).
pub fn membership_refinement(
    mu: f64,
    s: f64,
    q: f64,
    ns: &[usize],
    build: impl Fn(usize) -> Result<(GridFunction, DomainMask)>,
    tol: f64,
    growth_threshold: f64,
) -> Result<RefinementStudy> {
    let mut reports = Vec::new();
    for &n in ns {
        let (u, mask) = build(n)?;
        let spec = TransmissionSpaceSpec::new(mu, s, q, mask)?;
        reports.push(transmission_membership(&u, &spec, tol)?);
    }
    let growth: Vec<f64> = reports.windows(2).map(|w| w[1].norm / w[0].norm).collect();
    let finest = reports.last().map(|r| r.pass).unwrap_or(false);
    let pass = finest && growth.iter().all(|&g| g < growth_threshold);
    Ok(RefinementStudy {
        ns: ns.to_vec(),
        reports,
        growth,
        growth_threshold,
        pass,
    })
}

#[derive(Clone, Debug)]
pub struct DecompositionResult {
    /// Supported part.
    pub w: GridFunction,
    /// Co-factor of `d^μ`, zero outside the domain.
    pub v: GridFunction,
    /// `‖u - w - d^μ e⁺v‖∞`.
    pub residual: f64,
    /// Discrete `‖v‖_{H^{s-μ}_q(Ω)}`.
    pub v_norm: f64,
    /// Discrete `‖w‖_{H^s_q}`.
    pub w_norm: f64,
}

pub(crate) fn inward_normal(kind: &DomainKind, x: &[f64]) -> Vec<f64> {
    let h = 1e-6;
    let mut g = vec![0.0; x.len()];
    let mut p = x.to_vec();
    for a in 0..x.len() {
        p[a] = x[a] + h;
        let fp = kind.signed_distance(&p);
        p[a] = x[a] - h;
        let fm = kind.signed_distance(&p);
        p[a] = x[a];
        g[a] = (fp - fm) / (2.0 * h);
    }
    let n = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    g.iter().map(|v| v / n).collect()
}

/// `u = w + d^μ e⁺v` with `v = u/d^μ` at depth >= 4 cells, extended into
/// the collar from the collar edge along the inward normal, and
/// `w = u - d^μ e⁺v` (supported in the collar).
pub fn decompose(u: &GridFunction, spec: &TransmissionSpaceSpec) -> Result<DecompositionResult> {
    let (mu, s, q) = (spec.mu, spec.s, spec.q);
    let excess = s - mu - 1.0 / q;
    if excess <= 0.0 {
        return Err(Error::Regime(format!("decomposition needs s > μ + 1/q, got s - μ - 1/q = {excess}")));
    }
    if (excess - excess.round()).abs() < 1e-9 {
        return Err(Error::Regime(format!("s - μ - 1/q = {excess} is an integer")));
    }
    let mask = &spec.domain;
    mask.grid.check_same(&u.grid)?;
    let grid = u.grid;
    let h = grid.spacing();
    let collar = COLLAR_CELLS * h;
    let zero = Complex64::new(0.0, 0.0);
    let quotient: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            if mask.dist[i] >= collar {
                u.values[i] / mask.dist[i].powf(mu)
            } else {
                zero
            }
        })
        .collect();
    let mut v = quotient.clone();
    for i in 0..grid.len() {
        let d = mask.dist[i];
        if d <= 0.0 || d >= collar {
            continue;
        }
        let x = grid.node(i);
        v[i] = if grid.dim == 1 {
            // nearest node at depth >= collar on the same side
            let step = if inward_normal(&mask.kind, &x)[0] > 0.0 { 1i64 } else { -1 };
            let mut j = i as i64;
            loop {
                j = (j + step).rem_euclid(grid.n as i64);
                if mask.dist[j as usize] >= collar {
                    break quotient[j as usize];
                }
                if j as usize == i {
                    break zero;
                }
            }
        } else {
            let nu = inward_normal(&mask.kind, &x);
            let shift = collar + 1.5 * h - d;
            let p: Vec<f64> = x.iter().zip(&nu).map(|(a, b)| a + shift * b).collect();
            interpolate(&grid, &quotient, &p)
        };
    }
    let v = GridFunction::new(grid, v)?;
    let dmu: Vec<f64> = mask.dist.iter().map(|&d| if d > 0.0 { d.powf(mu) } else { 0.0 }).collect();
    let w = GridFunction::new(
        grid,
        (0..grid.len()).map(|i| u.values[i] - v.values[i] * dmu[i]).collect(),
    )?;
    let residual = (0..grid.len())
        .map(|i| (u.values[i] - w.values[i] - v.values[i] * dmu[i]).norm())
        .fold(0.0, f64::max);
    let v_norm = restricted_sobolev_norm(&v, mask, s - mu, q)?;
    let w_norm = sobolev_norm(&w, s, q)?;
    Ok(DecompositionResult {
        w,
        v,
        residual,
        v_norm,
        w_norm,
    })
}
