//! Boundary regularity diagnostics of Dirichlet solutions.

use crate::error::{Error, Result};
use crate::geometry::ChartAtlas;
use crate::grid::hoelder::{hoelder_quotient_points, PairSample};
use crate::grid::{DomainKind, DomainMask, GridFunction};
use crate::order_reduce::{transmission_membership, weighted_trace, MembershipReport, TraceReport, TransmissionSpaceSpec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::io::Write;

/// Collar (in cells) excluded from Hölder quotients.
pub const HOELDER_COLLAR_CELLS: f64 = 4.0;

/// Covariates of the exponent regression `log|u| ~ β log d + …`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `[log d, 1]`.
    Plain,
    /// `[log d, 1, d]`; in 2D also the tangential offset `t` and `t²`.
    Augmented,
}

/// Where the boundary is split into fit regions.
#[derive(Clone, Copy)]
pub enum FitRegions<'a> {
    /// 1D: the two endpoints of an interval.
    Endpoints,
    /// 2D: one region per chart, by nearest boundary arclength.
    Charts(&'a ChartAtlas),
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionFit {
    pub region: String,
    pub beta_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
    /// Sign change, too few points or a degenerate design.
    pub flagged: bool,
    pub note: String,
}

impl RegionFit {
    fn flagged(region: String, points: usize, note: &str) -> Self {
        RegionFit {
            region,
            beta_hat: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            points,
            flagged: true,
            note: note.into(),
        }
    }
}

/// Default fit window `[max(4h, 0.02), 0.25]` in 1D and `[2h, 0.25]` in 2D.
pub fn default_window(mask: &DomainMask) -> (f64, f64) {
    let h = mask.grid.spacing();
    if mask.grid.dim == 1 {
        ((4.0 * h).max(0.02), 0.25)
    } else {
        (2.0 * h, 0.25)
    }
}

/// Least squares with a 95% interval on the first coefficient.
fn regress(rows: &[Vec<f64>], y: &[f64]) -> Option<(f64, f64)> {
    let n = rows.len();
    let p = rows.first()?.len();
    if n < p + 2 {
        return None;
    }
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let inv = xtx.try_inverse()?;
    let coef = &inv * x.transpose() * &yv;
    let resid = &yv - &x * &coef;
    let dof = (n - p) as f64;
    let sigma2 = resid.norm_squared() / dof;
    let se = (sigma2 * inv[(0, 0)]).max(0.0).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).ok()?.inverse_cdf(0.975);
    if !coef[0].is_finite() {
        return None;
    }
    Some((coef[0], t * se))
}

/// Boundary exponent `β̂` per region: regression of `log|u|` on `log d`
/// (plus covariates) over interior nodes with `d` in the window.
pub fn boundary_exponent_fit(
    u: &GridFunction,
    mask: &DomainMask,
    window: (f64, f64),
    regions: FitRegions<'_>,
    model: FitModel,
) -> Result<Vec<RegionFit>> {
    mask.grid.check_same(&u.grid)?;
    if !(window.0 > 0.0 && window.1 > window.0) {
        return Err(Error::Argument(format!("invalid fit window {window:?}")));
    }
    // (region, d, tangential offset) per node in the window
    let grid = u.grid;
    let selected: Vec<(usize, usize, f64, f64)> = match regions {
        FitRegions::Endpoints => {
            let (a, b) = match mask.kind {
                DomainKind::Interval { a, b } => (a, b),
                _ => return Err(Error::Argument("endpoint regions need an interval".into())),
            };
            mask.interior()
                .iter()
                .filter_map(|&i| {
                    let x = grid.node(i)[0];
                    let d = mask.dist[i];
                    let region = if x - a <= b - x { 0 } else { 1 };
                    (d >= window.0 && d <= window.1).then_some((i, region, d, 0.0))
                })
                .collect()
        }
        FitRegions::Charts(atlas) => {
            if grid.dim != 2 {
                return Err(Error::Argument("chart regions need a 2D grid".into()));
            }
            let p = atlas.curve.perimeter();
            let nodes: Vec<usize> = mask
                .interior()
                .iter()
                .copied()
                .filter(|&i| mask.dist[i] >= window.0 && mask.dist[i] <= window.1)
                .collect();
            crate::exec::map_indexed(nodes.len(), |k| {
                let i = nodes[k];
                let x = grid.node(i);
                let pt = [x[0], x[1]];
                let (t, _) = atlas.curve.nearest(pt);
                let s = atlas.curve.arclength(t);
                let c = atlas.dominant_chart(pt);
                let ds = (s - atlas.charts[c].arclength + 0.5 * p).rem_euclid(p) - 0.5 * p;
                (i, c, mask.dist[i], ds)
            })
        }
    };
    let names: Vec<String> = match regions {
        FitRegions::Endpoints => vec!["left".into(), "right".into()],
        FitRegions::Charts(atlas) => (0..atlas.charts.len()).map(|c| format!("chart{c}")).collect(),
    };
    let two_d = matches!(regions, FitRegions::Charts(_));
    Ok(names
        .into_iter()
        .enumerate()
        .map(|(r, name)| {
            let pts: Vec<&(usize, usize, f64, f64)> = selected.iter().filter(|s| s.1 == r).collect();
            if pts.is_empty() {
                return RegionFit::flagged(name, 0, "no nodes in the fit window");
            }
            let vals: Vec<f64> = pts.iter().map(|s| u.values[s.0].re).collect();
            let positive = vals.iter().all(|&v| v > 0.0);
            let negative = vals.iter().all(|&v| v < 0.0);
            if !(positive || negative) {
                return RegionFit::flagged(name, pts.len(), "sign change in the fit window");
            }
            let rows: Vec<Vec<f64>> = pts
                .iter()
                .map(|&&(_, _, d, t)| {
                    let mut row = vec![d.ln(), 1.0];
                    if model == FitModel::Augmented {
                        row.push(d);
                        if two_d {
                            row.push(t);
                            row.push(t * t);
                        }
                    }
                    row
                })
                .collect();
            let y: Vec<f64> = vals.iter().map(|v| v.abs().ln()).collect();
            match regress(&rows, &y) {
                Some((beta, half)) => RegionFit {
                    region: name,
                    beta_hat: beta,
                    ci_low: beta - half,
                    ci_high: beta + half,
                    points: pts.len(),
                    flagged: false,
                    note: String::new(),
                },
                None => RegionFit::flagged(name, pts.len(), "degenerate regression"),
            }
        })
        .collect())
}

/// `u/d^a` on interior nodes, zero elsewhere.
pub fn weighted_quotient(u: &GridFunction, a: f64, mask: &DomainMask) -> Result<GridFunction> {
    mask.grid.check_same(&u.grid)?;
    let values = (0..u.grid.len())
        .map(|i| {
            let d = mask.dist[i];
            if mask.inside[i] && d > 0.0 {
                u.values[i] / d.powf(a)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    GridFunction::new(u.grid, values)
}

/// Hölder quotient of order `alpha` of `u/d^a` over node pairs at distance
/// at most 1, outside the collar.
pub fn quotient_hoelder(u: &GridFunction, a: f64, mask: &DomainMask, alpha: f64) -> Result<f64> {
    let q = weighted_quotient(u, a, mask)?;
    let collar = HOELDER_COLLAR_CELLS * mask.grid.spacing();
    let idx: Vec<usize> = mask.interior().iter().copied().filter(|&i| mask.dist[i] >= collar).collect();
    let points: Vec<Vec<f64>> = idx.iter().map(|&i| mask.grid.node(i)).collect();
    let values: Vec<Complex64> = idx.iter().map(|&i| q.values[i]).collect();
    hoelder_quotient_points(&points, &values, alpha, &PairSample::All { max_sep: 1.0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct HoelderRecord {
    pub alpha: f64,
    pub quotient: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementRecord {
    pub n: usize,
    pub beta_hat: Vec<f64>,
    pub hoelder: Vec<HoelderRecord>,
    pub solver_residual: f64,
}

#[derive(Clone, Debug)]
pub struct RegularityOptions {
    pub window: Option<(f64, f64)>,
    pub model: FitModel,
    /// Spread tolerance of the weighted trace extrapolation.
    pub trace_tol: f64,
    /// Data regularity `s` of the experiment (membership in `H^{a(s+2a)}`).
    pub s: f64,
    pub membership_tol: f64,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        RegularityOptions {
            window: None,
            model: FitModel::Augmented,
            trace_tol: 0.03,
            s: 0.0,
            membership_tol: 0.05,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub a: f64,
    pub window: (f64, f64),
    pub beta_hat: Vec<RegionFit>,
    /// `γ₀^a u`, when the domain supports trace sampling.
    pub trace: Option<TraceReport>,
    pub hoelder_quotients: Vec<HoelderRecord>,
    pub membership: Option<MembershipReport>,
    /// Why a diagnostic was skipped.
    pub notes: Vec<String>,
    pub solver_residual: f64,
    pub refinement: Vec<RefinementRecord>,
}

impl RegularityReport {
    pub fn trace_samples(&self) -> Vec<Complex64> {
        self.trace.as_ref().map_or_else(Vec::new, |t| t.samples.iter().map(|s| s.value).collect())
    }

    /// Writes `region,beta_hat,ci_low,ci_high`.
    pub fn write_exponent_csv<W: Write>(&self, w: W) -> Result<()> {
        write_exponent_csv(&self.beta_hat, w)
    }
}

pub fn write_exponent_csv<W: Write>(fits: &[RegionFit], mut w: W) -> Result<()> {
    writeln!(w, "region,beta_hat,ci_low,ci_high")?;
    for f in fits {
        writeln!(w, "{},{:.12e},{:.12e},{:.12e}", f.region, f.beta_hat, f.ci_low, f.ci_high)?;
    }
    Ok(())
}

/// Writes `x…,u,u_over_da` for the interior nodes (plot data).
pub fn write_solution_csv<W: Write>(u: &GridFunction, a: f64, mask: &DomainMask, mut w: W) -> Result<()> {
    let q = weighted_quotient(u, a, mask)?;
    if u.grid.dim == 1 {
        writeln!(w, "x,u,u_over_da")?;
    } else {
        writeln!(w, "x1,x2,u,u_over_da")?;
    }
    for &i in mask.interior() {
        let x = u.grid.node(i);
        let coords: Vec<String> = x.iter().map(|v| format!("{v:.12e}")).collect();
        writeln!(w, "{},{:.12e},{:.12e}", coords.join(","), u.values[i].re, q.values[i].re)?;
    }
    Ok(())
}

/// Hölder orders reported: `a/2` and `a - 0.05`.
pub fn hoelder_orders(a: f64) -> Vec<f64> {
    let mut v = vec![0.5 * a];
    if a - 0.05 > 0.0 && (a - 0.05 - 0.5 * a).abs() > 1e-12 {
        v.push(a - 0.05);
    }
    v
}

/// Collects the regularity diagnostics of a solution `u` of `r⁺Pu = f`.
pub fn regularity_report(
    u: &GridFunction,
    solver_residual: f64,
    a: f64,
    mask: &DomainMask,
    regions: FitRegions<'_>,
    opts: &RegularityOptions,
) -> Result<RegularityReport> {
    let window = opts.window.unwrap_or_else(|| default_window(mask));
    let beta_hat = boundary_exponent_fit(u, mask, window, regions, opts.model)?;
    let mut notes = Vec::new();
    let trace = match weighted_trace(u, a, mask, opts.trace_tol) {
        Ok(t) => Some(t),
        Err(e) => {
            notes.push(format!("weighted trace skipped: {e}"));
            None
        }
    };
    let hoelder_quotients = hoelder_orders(a)
        .into_iter()
        .map(|alpha| Ok(HoelderRecord {
            alpha,
            quotient: quotient_hoelder(u, a, mask, alpha)?,
        }))
        .collect::<Result<Vec<_>>>()?;
    let membership = TransmissionSpaceSpec::new(a, opts.s + 2.0 * a, 2.0, mask.clone())
        .and_then(|spec| transmission_membership(u, &spec, opts.membership_tol));
    let membership = match membership {
        Ok(m) => Some(m),
        Err(e) => {
            notes.push(format!("membership skipped: {e}"));
            None
        }
    };
    Ok(RegularityReport {
        a,
        window,
        beta_hat,
        trace,
        hoelder_quotients,
        membership,
        notes,
        solver_residual,
        refinement: Vec::new(),
    })
}

impl RefinementRecord {
    pub fn from_report(n: usize, r: &RegularityReport) -> Self {
        RefinementRecord {
            n,
            beta_hat: r.beta_hat.iter().map(|f| f.beta_hat).collect(),
            hoelder: r.hoelder_quotients.clone(),
            solver_residual: r.solver_residual,
        }
    }
}

/// Growth of each Hölder quotient between consecutive refinement records.
pub fn hoelder_growth(records: &[RefinementRecord]) -> Vec<Vec<f64>> {
    records
        .windows(2)
        .map(|w| {
            w[0].hoelder
                .iter()
                .zip(&w[1].hoelder)
                .map(|(c, f)| f.quotient / c.quotient)
                .collect()
        })
        .collect()
}
