//! Classical symbols with homogeneous expansions.
//!
//! A [`ClassicalSymbol`] of order `m` stores terms `p_j`, each homogeneous of
//! degree `m - j` for `|ξ| >= 1`. Terms are expression trees evaluated either
//! on plain complex numbers or on Taylor jets, so ξ-derivatives up to
//! order four are exact. x-derivatives use centered differences with step
//! `h = x_step * (1 + |x|)`.
//!
//! The checks in this module (parity, strong ellipticity, μ-transmission)
//! act on the strictly homogeneous version of each term. For the
//! order-reducing symbols `(⟨ξ'⟩ ± iξₙ)^t` that is `(|ξ'| ± iξₙ)^t`.

mod expr;
pub mod registry;

pub use expr::{Coefficient, Expr, Sign};

use crate::error::{Error, Result};
use crate::grid::hoelder::ctau_norm_points;
use crate::jet::{Jet, MAX_DEGREE};
use crate::multi;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// Relative residuals are divided by at least this much.
pub const RESIDUAL_FLOOR: f64 = 1e-300;
/// Default tolerance for the μ-transmission check.
pub const TRANSMISSION_TOL: f64 = 1e-8;

/// Anything that can be quantized in x-form: a function `p(x, ξ)`.
pub trait Symbol: Send + Sync {
    fn dim(&self) -> usize;
    fn order(&self) -> f64;
    fn depends_on_x(&self) -> bool;
    fn value(&self, x: &[f64], xi: &[f64]) -> Complex64;
    /// Taylor jet in ξ at `(x, ξ)`, when ξ-derivatives are available.
    fn jet(&self, _x: &[f64], _xi: &[f64]) -> Option<Jet> {
        None
    }
    fn name(&self) -> String {
        "symbol".into()
    }
    /// Hölder regularity in x.
    fn hoelder(&self) -> f64 {
        f64::INFINITY
    }
}

impl<S: Symbol + ?Sized> Symbol for std::sync::Arc<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn order(&self) -> f64 {
        (**self).order()
    }
    fn depends_on_x(&self) -> bool {
        (**self).depends_on_x()
    }
    fn value(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        (**self).value(x, xi)
    }
    fn jet(&self, x: &[f64], xi: &[f64]) -> Option<Jet> {
        (**self).jet(x, xi)
    }
    fn name(&self) -> String {
        (**self).name()
    }
    fn hoelder(&self) -> f64 {
        (**self).hoelder()
    }
}

/// Smooth cutoff ζ with ζ = 1 on `|ξ| <= r0` and ζ = 0 on `|ξ| >= r1`
/// (quintic smoothstep in `|ξ|`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Excision {
    pub r0: f64,
    pub r1: f64,
}

impl Default for Excision {
    fn default() -> Self {
        Excision { r0: 0.5, r1: 1.0 }
    }
}

fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

impl Excision {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        if !(0.0 < r0 && r0 < r1) {
            return Err(Error::Argument(format!("excision radii need 0 < r0 < r1, got {r0}, {r1}")));
        }
        Ok(Excision { r0, r1 })
    }

    /// ζ(ξ).
    pub fn zeta(&self, r: f64) -> f64 {
        1.0 - smoothstep((r - self.r0) / (self.r1 - self.r0))
    }

    /// `1 - ζ` as a jet, seeded from the jets of the ξ components.
    fn one_minus_zeta_jet(&self, xi: &[Jet]) -> Jet {
        use crate::jet::Scalar;
        let mut r2 = Jet::constant(Complex64::new(0.0, 0.0));
        for v in xi {
            r2 = r2 + *v * *v;
        }
        let r = r2.value().re.sqrt();
        if r <= self.r0 {
            return Jet::constant(Complex64::new(0.0, 0.0));
        }
        if r >= self.r1 {
            return Jet::constant(Complex64::new(1.0, 0.0));
        }
        let w = 1.0 / (self.r1 - self.r0);
        let u = (r2.sqrt() - Jet::constant(Complex64::new(self.r0, 0.0))).scale(Complex64::new(w, 0.0));
        let u2 = u * u;
        let poly = Jet::constant(Complex64::new(10.0, 0.0)) - u.scale(Complex64::new(15.0, 0.0))
            + u2.scale(Complex64::new(6.0, 0.0));
        u2 * u * poly
    }
}

/// One term `p_j` of a classical expansion.
#[derive(Clone, Debug)]
pub struct HomogeneousTerm {
    /// `m - j`.
    pub degree: f64,
    /// Evaluator used for the symbol's values.
    pub expr: Expr,
    /// Strictly homogeneous version, when it differs from `expr`.
    pub principal: Option<Expr>,
}

impl HomogeneousTerm {
    pub fn new(degree: f64, expr: Expr) -> Self {
        HomogeneousTerm {
            degree,
            expr,
            principal: None,
        }
    }

    pub fn homogeneous(&self) -> &Expr {
        self.principal.as_ref().unwrap_or(&self.expr)
    }
}

#[derive(Clone, Debug)]
pub struct ClassicalSymbol {
    pub name: String,
    pub dim: usize,
    pub order: f64,
    pub hoelder: f64,
    pub terms: Vec<HomogeneousTerm>,
    pub excision: Option<Excision>,
    /// Highest ξ-derivative order the evaluators provide.
    pub max_xi_order: usize,
    /// Relative finite-difference step for x-derivatives.
    pub x_step: f64,
}

fn seed(xi: &[f64]) -> Vec<Jet> {
    xi.iter().enumerate().map(|(k, &v)| Jet::variable(k, v)).collect()
}

/// ξ = Σ_r (η_r + ε_r) e_r for an orthonormal frame `basis`.
fn seed_frame(eta: &[f64], basis: &[Vec<f64>]) -> Vec<Jet> {
    let n = basis.len();
    (0..n)
        .map(|k| {
            let mut acc = Jet::constant(Complex64::new(0.0, 0.0));
            for r in 0..n {
                acc = acc + Jet::variable(r, eta[r]).scale(Complex64::new(basis[r][k], 0.0));
            }
            acc
        })
        .collect()
}

/// Centered finite-difference derivative `∂^β f(x)` along the directions
/// `dirs` (one direction per component of β).
pub fn fd_derivative(
    f: &dyn Fn(&[f64]) -> Complex64,
    x: &[f64],
    dirs: &[Vec<f64>],
    beta: &[usize],
    rel_step: f64,
) -> Complex64 {
    let Some(i) = beta.iter().position(|&b| b > 0) else {
        return f(x);
    };
    let mut reduced = beta.to_vec();
    reduced[i] -= 1;
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = rel_step * (1.0 + norm);
    let shift = |s: f64| -> Vec<f64> { x.iter().zip(&dirs[i]).map(|(a, d)| a + s * d).collect() };
    let fp = fd_derivative(f, &shift(h), dirs, &reduced, rel_step);
    let fm = fd_derivative(f, &shift(-h), dirs, &reduced, rel_step);
    (fp - fm) / (2.0 * h)
}

fn axis_dirs(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|k| (0..dim).map(|l| if k == l { 1.0 } else { 0.0 }).collect())
        .collect()
}

impl ClassicalSymbol {
    pub fn new(name: impl Into<String>, dim: usize, order: f64, hoelder: f64, terms: Vec<HomogeneousTerm>) -> Self {
        assert!(dim == 1 || dim == 2, "dimension must be 1 or 2");
        ClassicalSymbol {
            name: name.into(),
            dim,
            order,
            hoelder,
            terms,
            excision: None,
            max_xi_order: MAX_DEGREE,
            x_step: 1e-5,
        }
    }

    pub fn with_excision(mut self, ex: Excision) -> Self {
        self.excision = Some(ex);
        self
    }

    pub fn depends_on_x(&self) -> bool {
        self.terms.iter().any(|t| t.expr.depends_on_x())
    }

    fn sum_terms<S: crate::jet::Scalar>(&self, x: &[f64], xi: &[S]) -> S {
        let mut acc = S::from_real(0.0);
        for t in &self.terms {
            acc = acc + t.expr.eval(x, xi);
        }
        acc
    }

    /// Value of the full symbol (excision included).
    pub fn value_at(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        let factor = match &self.excision {
            Some(ex) => {
                let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                let f = 1.0 - ex.zeta(r);
                if f == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                f
            }
            None => 1.0,
        };
        let xc: Vec<Complex64> = xi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.sum_terms(x, &xc) * factor
    }

    /// Jet of the full symbol at `(x, ξ)`.
    pub fn jet_at(&self, x: &[f64], xi: &[f64]) -> Jet {
        let seeded = seed(xi);
        let base = self.sum_terms(x, &seeded);
        match &self.excision {
            Some(ex) => {
                let f = ex.one_minus_zeta_jet(&seeded);
                if f.c.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                    return f;
                }
                base * f
            }
            None => base,
        }
    }

    fn check_alpha(&self, alpha: &[usize]) -> Result<()> {
        if alpha.len() != self.dim {
            return Err(Error::Argument(format!(
                "multi-index of length {} for a {}-dimensional symbol",
                alpha.len(),
                self.dim
            )));
        }
        let k = multi::order(alpha);
        if k > self.max_xi_order {
            return Err(Error::Capability(format!(
                "ξ-derivative of order {k} requested, symbol '{}' provides up to {}",
                self.name, self.max_xi_order
            )));
        }
        Ok(())
    }

    /// x-step used at `x`.
    pub fn x_step_at(&self, x: &[f64]) -> f64 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.x_step * (1.0 + norm)
    }
}

impl Symbol for ClassicalSymbol {
    fn dim(&self) -> usize {
        self.dim
    }
    fn hoelder(&self) -> f64 {
        self.hoelder
    }
    fn order(&self) -> f64 {
        self.order
    }
    fn depends_on_x(&self) -> bool {
        ClassicalSymbol::depends_on_x(self)
    }
    fn value(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        self.value_at(x, xi)
    }
    fn jet(&self, x: &[f64], xi: &[f64]) -> Option<Jet> {
        Some(self.jet_at(x, xi))
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

/// `∂_ξ^α p(x, ξ)` of the full symbol, excision included.
pub fn eval_symbol(sym: &ClassicalSymbol, x: &[f64], xi: &[f64], alpha: &[usize]) -> Result<Complex64> {
    sym.check_alpha(alpha)?;
    if xi.len() != sym.dim {
        return Err(Error::Argument("frequency has the wrong dimension".into()));
    }
    let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
    let (v, ok) = if multi::order(alpha) == 0 {
        let v = sym.value_at(x, xi);
        (v, finite(&v))
    } else {
        // a non-finite coefficient anywhere in the jet marks a singular point
        let j = sym.jet_at(x, xi);
        (j.derivative_multi(alpha), j.c.iter().all(finite))
    };
    if !ok {
        return Err(Error::Singularity(format!(
            "symbol '{}' is singular at ξ = {:?}",
            sym.name, xi
        )));
    }
    Ok(v)
}

/// `∂_x^β ∂_ξ^α p_j(x, ξ)` of the strictly homogeneous term `j`, with ξ and
/// the x-directions expressed in the orthonormal `frame`.
fn term_derivative(
    sym: &ClassicalSymbol,
    j: usize,
    x: &[f64],
    eta: &[f64],
    frame: &[Vec<f64>],
    alpha: &[usize],
    beta: &[usize],
) -> Complex64 {
    let expr = sym.terms[j].homogeneous();
    let f = |xx: &[f64]| -> Complex64 {
        if multi::order(alpha) == 0 {
            let xi: Vec<Complex64> = (0..sym.dim)
                .map(|k| Complex64::new((0..sym.dim).map(|r| eta[r] * frame[r][k]).sum(), 0.0))
                .collect();
            expr.eval(xx, &xi)
        } else {
            expr.eval(xx, &seed_frame(eta, frame)).derivative_multi(alpha)
        }
    };
    fd_derivative(&f, x, frame, beta, sym.x_step)
}

/// Points `(x, ξ)` at which symbol properties are sampled.
#[derive(Clone, Debug, Default)]
pub struct SymbolSample {
    pub xs: Vec<Vec<f64>>,
    pub xis: Vec<Vec<f64>>,
}

impl SymbolSample {
    /// 1D: `nx` equispaced points on `[x0, x1]` and the given frequencies.
    pub fn line(x0: f64, x1: f64, nx: usize, xis: &[f64]) -> Self {
        let xs = (0..nx)
            .map(|i| vec![x0 + (x1 - x0) * i as f64 / (nx.max(2) - 1) as f64])
            .collect();
        SymbolSample {
            xs,
            xis: xis.iter().map(|&v| vec![v]).collect(),
        }
    }

    /// Random unit vectors in dimension `dim`, drawn from a seeded generator.
    pub fn sphere(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                if dim == 1 {
                    vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }]
                } else {
                    let th: f64 = rng.gen_range(0.0..2.0 * PI);
                    vec![th.cos(), th.sin()]
                }
            })
            .collect()
    }

    /// Frequencies of radius `radii` in every sampled direction.
    pub fn shells(dim: usize, radii: &[f64], dirs: usize, seed: u64) -> Vec<Vec<f64>> {
        let d = Self::sphere(dim, dirs, seed);
        radii
            .iter()
            .flat_map(|&r| d.iter().map(move |v| v.iter().map(|c| c * r).collect::<Vec<_>>()))
            .collect()
    }
}

/// Symbol seminorm of order `k`: the largest value over `|α| <= k` and the
/// sampled ξ of `⟨ξ⟩^{|α|-m}` times the discrete `C^τ` norm in x of
/// `∂_ξ^α p(·, ξ)` (τ = the symbol's Hölder exponent).
pub fn seminorm(sym: &ClassicalSymbol, k: usize, sample: &SymbolSample) -> Result<f64> {
    if sample.xs.is_empty() || sample.xis.is_empty() {
        return Err(Error::Argument("empty seminorm sample".into()));
    }
    let dirs = axis_dirs(sym.dim);
    let mut best: f64 = 0.0;
    for alpha in multi::up_to(sym.dim, k) {
        sym.check_alpha(&alpha)?;
        for xi in &sample.xis {
            let weight = (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).powf(0.5 * (multi::order(&alpha) as f64 - sym.order));
            let f = |x: &[f64]| -> Complex64 {
                if multi::order(&alpha) == 0 {
                    sym.value_at(x, xi)
                } else {
                    sym.jet_at(x, xi).derivative_multi(&alpha)
                }
            };
            let norm = if sym.depends_on_x() {
                ctau_norm_points(&sample.xs, sym.hoelder, 1.0, |i, beta| {
                    fd_derivative(&f, &sample.xs[i], &dirs, beta, sym.x_step)
                })
            } else {
                f(&sample.xs[0]).norm()
            };
            if !norm.is_finite() {
                return Err(Error::Singularity(format!("seminorm sample at ξ = {xi:?} is singular")));
            }
            best = best.max(weight * norm);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParityReport {
    pub kind: Parity,
    /// Largest `|p_j(x,-ξ) - σ_j p_j(x,ξ)|`.
    pub max_residual: f64,
    /// Same, divided by `max(|p_j(x,ξ)|, |p_j(x,-ξ)|)`.
    pub max_relative: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Parity check of the homogeneous terms at the samples `(x, ξ)`.
pub fn check_parity(sym: &ClassicalSymbol, kind: Parity, samples: &SymbolSample, tol: f64) -> ParityReport {
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for (j, term) in sym.terms.iter().enumerate() {
        let sigma = match kind {
            Parity::Even => (-1f64).powi(j as i32),
            Parity::Odd => (-1f64).powi(j as i32 + 1),
        };
        for x in &samples.xs {
            for xi in &samples.xis {
                let xp: Vec<Complex64> = xi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let xm: Vec<Complex64> = xi.iter().map(|&v| Complex64::new(-v, 0.0)).collect();
                let pp = term.homogeneous().eval(x, &xp);
                let pm = term.homogeneous().eval(x, &xm);
                let r = (pm - pp * sigma).norm();
                max_abs = max_abs.max(r);
                max_rel = max_rel.max(r / pp.norm().max(pm.norm()).max(RESIDUAL_FLOOR));
            }
        }
    }
    ParityReport {
        kind,
        max_residual: max_abs,
        max_relative: max_rel,
        tolerance: tol,
        pass: max_rel <= tol,
    }
}

/// `min Re p₀(x, ξ) / |ξ|^m` over the samples; positive means strongly
/// elliptic on the sample.
pub fn check_strong_ellipticity(sym: &ClassicalSymbol, sphere: &[Vec<f64>], xs: &[Vec<f64>]) -> Result<f64> {
    let p0 = sym
        .terms
        .first()
        .ok_or_else(|| Error::Argument("symbol has no principal term".into()))?;
    let mut margin = f64::INFINITY;
    for x in xs {
        for xi in sphere {
            let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let xc: Vec<Complex64> = xi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let v = p0.homogeneous().eval(x, &xc);
            margin = margin.min(v.re / r.powf(sym.order));
        }
    }
    Ok(margin)
}

/// A boundary point with its inward unit normal.
#[derive(Clone, Debug, Serialize)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
}

impl BoundarySample {
    pub fn new(point: Vec<f64>, normal: Vec<f64>) -> Self {
        BoundarySample { point, normal }
    }

    /// Orthonormal frame `(tangent, normal)`; the tangent has positive first
    /// component, ties broken toward positive second component.
    pub fn frame(&self) -> Vec<Vec<f64>> {
        if self.normal.len() == 1 {
            return vec![vec![self.normal[0].signum()]];
        }
        let nn = (self.normal[0].powi(2) + self.normal[1].powi(2)).sqrt();
        let n = [self.normal[0] / nn, self.normal[1] / nn];
        let mut t = [n[1], -n[0]];
        if t[0] < 0.0 || (t[0] == 0.0 && t[1] < 0.0) {
            t = [-t[0], -t[1]];
        }
        vec![t.to_vec(), n.to_vec()]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransmissionRecord {
    pub j: usize,
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub point: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransmissionReport {
    pub mu: f64,
    pub residuals: Vec<TransmissionRecord>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Multi-indices left out because the term is not smooth in the
    /// tangential variables at `ξ' = 0`.
    pub skipped: usize,
}

/// Orders for [`check_mu_transmission`].
#[derive(Clone, Copy, Debug)]
pub struct TransmissionOrders {
    /// Number of terms checked (`j < terms`).
    pub terms: usize,
    /// Largest `|α|`.
    pub xi: usize,
    /// Largest `|β|`.
    pub x: usize,
}

impl TransmissionOrders {
    pub fn default_for(sym: &ClassicalSymbol) -> Self {
        TransmissionOrders {
            terms: sym.terms.len().min(3),
            xi: 2,
            // smooth symbols get the same cap as C^2 ones
            x: sym.hoelder.floor().clamp(0.0, 2.0) as usize,
        }
    }
}

/// Twisted-parity residuals
/// `|∂_x^β∂_ξ^α p_j(x,0,-1) - e^{iπ(m-2μ-j-|α|)} ∂_x^β∂_ξ^α p_j(x,0,1)|`
/// in normal-adapted coordinates, divided by the largest magnitude involved.
pub fn check_mu_transmission(
    sym: &ClassicalSymbol,
    mu: f64,
    samples: &[BoundarySample],
    orders: TransmissionOrders,
    tol: f64,
) -> Result<TransmissionReport> {
    if orders.terms > sym.terms.len() {
        return Err(Error::Capability(format!(
            "{} terms requested, symbol '{}' stores {}",
            orders.terms,
            sym.name,
            sym.terms.len()
        )));
    }
    if orders.xi > sym.max_xi_order {
        return Err(Error::Capability(format!("ξ-order {} exceeds {}", orders.xi, sym.max_xi_order)));
    }
    let n = sym.dim;
    let mut plus = vec![0.0; n];
    plus[n - 1] = 1.0;
    let mut minus = plus.clone();
    minus[n - 1] = -1.0;
    let mut records = Vec::new();
    let mut skipped = 0;
    for (pid, s) in samples.iter().enumerate() {
        if s.point.len() != n || s.normal.len() != n {
            return Err(Error::Argument("boundary sample has the wrong dimension".into()));
        }
        let frame = s.frame();
        for j in 0..orders.terms {
            let tangential_ok = n == 1 || !sym.terms[j].homogeneous().has_principal_chi();
            let none = vec![0; n];
            let scale_p = term_derivative(sym, j, &s.point, &plus, &frame, &none, &none).norm();
            let scale_m = term_derivative(sym, j, &s.point, &minus, &frame, &none, &none).norm();
            for alpha in multi::up_to(n, orders.xi) {
                if !tangential_ok && alpha[..n - 1].iter().any(|&a| a > 0) {
                    skipped += 1;
                    continue;
                }
                let ka = multi::order(&alpha) as f64;
                let twist = Complex64::from_polar(1.0, PI * (sym.order - 2.0 * mu - j as f64 - ka));
                for beta in multi::up_to(n, orders.x) {
                    let dp = term_derivative(sym, j, &s.point, &plus, &frame, &alpha, &beta);
                    let dm = term_derivative(sym, j, &s.point, &minus, &frame, &alpha, &beta);
                    let denom = scale_p.max(scale_m).max(dp.norm()).max(dm.norm()).max(RESIDUAL_FLOOR);
                    let r = (dm - twist * dp).norm() / denom;
                    records.push(TransmissionRecord {
                        j,
                        alpha: alpha.clone(),
                        beta,
                        point: pid,
                        residual: if r.is_finite() { r } else { f64::INFINITY },
                    });
                }
            }
        }
    }
    let max_residual = records.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(TransmissionReport {
        mu,
        residuals: records,
        max_residual,
        tolerance: tol,
        pass: max_residual <= tol,
        skipped,
    })
}

/// Product symbol with terms `(pp')_j = Σ_{k+l=j} p_k p'_l`.
pub fn multiply_symbols(p: &ClassicalSymbol, q: &ClassicalSymbol) -> Result<ClassicalSymbol> {
    if p.dim != q.dim {
        return Err(Error::Argument("symbols of different dimension".into()));
    }
    let count = p.terms.len().min(q.terms.len());
    let mut terms = Vec::with_capacity(count);
    for j in 0..count {
        let mut expr: Option<Expr> = None;
        let mut principal: Option<Expr> = None;
        let mut needs_principal = false;
        for k in 0..=j {
            let (a, b) = (&p.terms[k], &q.terms[j - k]);
            needs_principal |= a.principal.is_some() || b.principal.is_some();
            let e = Expr::mul(a.expr.clone(), b.expr.clone());
            let h = Expr::mul(a.homogeneous().clone(), b.homogeneous().clone());
            expr = Some(match expr {
                None => e,
                Some(acc) => Expr::add(acc, e),
            });
            principal = Some(match principal {
                None => h,
                Some(acc) => Expr::add(acc, h),
            });
        }
        terms.push(HomogeneousTerm {
            degree: p.order + q.order - j as f64,
            expr: expr.expect("at least one product"),
            principal: if needs_principal { principal } else { None },
        });
    }
    let mut out = ClassicalSymbol::new(
        format!("({})*({})", p.name, q.name),
        p.dim,
        p.order + q.order,
        p.hoelder.min(q.hoelder),
        terms,
    );
    out.excision = p.excision.or(q.excision);
    out.max_xi_order = p.max_xi_order.min(q.max_xi_order);
    Ok(out)
}

/// `(⟨ξ'⟩ ± iξₙ)^t` as a single term of degree `t`.
pub fn order_reducing_symbol(dim: usize, t: f64, sign: Sign) -> ClassicalSymbol {
    let name = match sign {
        Sign::Plus => format!("chi_plus({t})"),
        Sign::Minus => format!("chi_minus({t})"),
    };
    let term = HomogeneousTerm {
        degree: t,
        expr: Expr::Chi {
            sign,
            t,
            principal: false,
        },
        principal: Some(Expr::Chi { sign, t, principal: true }),
    };
    ClassicalSymbol::new(name, dim, t, f64::INFINITY, vec![term])
}

/// `p - p₀` regarded as a symbol of order `m - 1` (terms re-indexed).
pub fn drop_principal(p: &ClassicalSymbol) -> Result<ClassicalSymbol> {
    if p.terms.len() < 2 {
        return Err(Error::Capability("symbol has no lower-order terms".into()));
    }
    let mut out = p.clone();
    out.name = format!("{} - principal", p.name);
    out.order = p.order - 1.0;
    out.terms.remove(0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_second_derivative_of_sine() {
        let f = |x: &[f64]| Complex64::new(x[0].sin(), 0.0);
        let d = fd_derivative(&f, &[0.7], &[vec![1.0]], &[2], 1e-4);
        assert!((d.re + 0.7f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn frame_orientation() {
        let f = BoundarySample::new(vec![0.0, 0.0], vec![0.0, 1.0]).frame();
        assert_eq!(f[0], vec![1.0, -0.0]);
        let g = BoundarySample::new(vec![0.0, 0.0], vec![1.0, 0.0]).frame();
        assert_eq!(g[0], vec![0.0, 1.0]);
    }
}
