//! Taylor reduction of (x,y)-form amplitudes to x-form.
//!
//! With `w = wrap(y - x)` and `a_α(x, ξ) = (1/α!) ∂_y^α a(x, y, ξ)|_{y=x}`
//! (centered differences with one grid cell as step),
//!
//! `a = Σ_{|α|<=l} w^α a_α + R`,  `R(x, x, ξ) = 0`.
//!
//! On the torus `op((y-x)^α b) = op(D^α b)` holds exactly when `D` is the
//! lattice derivative of [`lattice_derivative`], so
//! `op(a) = Σ op(p_α) + op(R)` with `p_α = D^α a_α` holds up to round-off.
//! The Gauss–Legendre integral form of the remainder is available as
//! [`IntegralRemainder`] for comparison.

use super::{apply_x_form, apply_xy_form, Amplitude, GridCtx, PointAmplitude, TabulatedSymbol};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{bracket, raw_fft, GridFunction, TorusGrid};
use crate::multi;
use crate::quadrature::gauss_legendre_unit;
use num_complex::Complex64;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Centered difference stencil for the `m`-th derivative (unscaled by h^m).
fn stencil_1d(m: usize) -> Vec<(i64, f64)> {
    match m {
        0 => vec![(0, 1.0)],
        1 => vec![(-1, -0.5), (1, 0.5)],
        2 => vec![(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => vec![(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => vec![(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => panic!("difference stencils are provided up to order 4"),
    }
}

/// Tensor-product stencil for `∂^α`: (shift, weight) pairs.
fn stencil(alpha: &[usize]) -> Vec<(Vec<i64>, f64)> {
    let mut out: Vec<(Vec<i64>, f64)> = vec![(vec![], 1.0)];
    for &m in alpha {
        let mut next = Vec::new();
        for (s, w) in &out {
            for &(o, c) in &stencil_1d(m) {
                let mut t = s.clone();
                t.push(o);
                next.push((t, w * c));
            }
        }
        out = next;
    }
    out
}

fn monomial(w: &[f64], alpha: &[usize]) -> f64 {
    alpha.iter().zip(w).map(|(&a, &x)| x.powi(a as i32)).product()
}

/// Lattice ξ-derivative: returns `c` with `op(c) = op((y-x)^α b)` exactly on
/// the torus, for a row `b(ξ_k)` at a fixed node.
pub fn lattice_derivative(grid: &TorusGrid, row: &[Complex64], alpha: &[usize]) -> Vec<Complex64> {
    if multi::order(alpha) == 0 {
        return row.to_vec();
    }
    let total = grid.len();
    let mut k = row.to_vec();
    raw_fft(grid.dim, grid.n, &mut k, true);
    let h = grid.spacing();
    for (d, v) in k.iter_mut().enumerate() {
        let m = grid.unflatten(d);
        let mut w = [0.0; 2];
        for a in 0..grid.dim {
            w[a] = grid.wrap_cells(-(m[a] as i64)) as f64 * h;
        }
        *v *= monomial(&w[..grid.dim], alpha) / total as f64;
    }
    raw_fft(grid.dim, grid.n, &mut k, false);
    k
}

/// `R = a - Σ_{|α|<=l} w^α a_α`, tied to the grid it was built on.
pub struct ResidualRemainder {
    pub a: Arc<dyn Amplitude>,
    pub grid: TorusGrid,
    pub alphas: Vec<Vec<usize>>,
    /// `a_α(x_i, ξ_k)` indexed `[α][i][k]`.
    pub coeffs: Vec<Vec<Vec<Complex64>>>,
}

impl Amplitude for ResidualRemainder {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn order(&self) -> f64 {
        self.a.order()
    }
    fn hoelder(&self) -> f64 {
        self.a.hoelder()
    }
    fn name(&self) -> String {
        format!("remainder of {}", self.a.name())
    }
    fn vanishes_on_diagonal(&self) -> bool {
        true
    }
    fn row(&self, ctx: &GridCtx, i: usize, j: usize, out: &mut [Complex64]) {
        self.a.row(ctx, i, j, out);
        let w = ctx.offset(i, j);
        for (alpha, c) in self.alphas.iter().zip(&self.coeffs) {
            let wa = if multi::order(alpha) == 0 {
                1.0
            } else {
                monomial(&w[..ctx.grid.dim], alpha)
            };
            if wa == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(&c[i]) {
                *o -= v * wa;
            }
        }
    }
}

/// Integral form `Σ_{|α|=l} w^α r_α` with
/// `r_α = (|α|/α!) ∫₀¹ (1-t)^{|α|-1} ∂_y^α a(x, x+tw, ξ) dt - a_α(x, ξ)`
/// (16-point Gauss–Legendre), and `r_0 = a(x, y, ξ) - a(x, x, ξ)` for l = 0.
pub struct IntegralRemainder {
    pub a: Arc<dyn Amplitude>,
    pub l: usize,
    pub grid: TorusGrid,
    pub alphas: Vec<Vec<usize>>,
    pub diagonal: Vec<Vec<Vec<Complex64>>>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Amplitude for IntegralRemainder {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn order(&self) -> f64 {
        self.a.order()
    }
    fn hoelder(&self) -> f64 {
        self.a.hoelder()
    }
    fn name(&self) -> String {
        format!("integral remainder of {}", self.a.name())
    }
    fn vanishes_on_diagonal(&self) -> bool {
        true
    }
    fn row(&self, ctx: &GridCtx, i: usize, j: usize, out: &mut [Complex64]) {
        let dim = ctx.grid.dim;
        if self.l == 0 {
            self.a.row(ctx, i, j, out);
            for (o, v) in out.iter_mut().zip(&self.diagonal[0][i]) {
                *o -= v;
            }
            return;
        }
        let p = self.a.as_point().expect("integral remainder needs a pointwise amplitude");
        let x = &ctx.nodes[i];
        let w = ctx.offset(i, j);
        let h = ctx.grid.spacing();
        out.iter_mut().for_each(|o| *o = ZERO);
        for (alpha, diag) in self.alphas.iter().zip(&self.diagonal) {
            let wa = monomial(&w[..dim], alpha);
            if wa == 0.0 {
                continue;
            }
            let ord = multi::order(alpha);
            let pre = ord as f64 / multi::factorial(alpha);
            let st = stencil(alpha);
            let scale = 1.0 / h.powi(ord as i32);
            for (k, o) in out.iter_mut().enumerate() {
                let xi = &ctx.freqs[k];
                let mut integral = ZERO;
                for (t, q) in self.nodes.iter().zip(&self.weights) {
                    let mut d = ZERO;
                    for (s, c) in &st {
                        let y: Vec<f64> = (0..dim).map(|a| x[a] + t * w[a] + s[a] as f64 * h).collect();
                        d += p.value(x, &y, xi) * *c;
                    }
                    integral += d * (scale * q * (1.0 - t).powi(ord as i32 - 1));
                }
                *o += (integral * pre - diag[i][k]) * wa;
            }
        }
    }
}

/// Result of [`reduce_to_x_form`].
pub struct XFormExpansion {
    pub l: usize,
    pub grid: TorusGrid,
    /// `(α, p_α)` for `|α| <= l`.
    pub terms: Vec<(Vec<usize>, TabulatedSymbol)>,
    pub remainder: Arc<ResidualRemainder>,
    /// Present when the amplitude can be evaluated pointwise.
    pub integral_remainder: Option<Arc<IntegralRemainder>>,
}

impl XFormExpansion {
    /// `Σ op(p_α)u + op(R)u`.
    pub fn apply(&self, u: &GridFunction, max_flops: f64) -> Result<GridFunction> {
        let mut acc = apply_xy_form(self.remainder.as_ref(), u, max_flops)?;
        for (_, p) in &self.terms {
            acc = acc.add(&apply_x_form(p, u)?)?;
        }
        Ok(acc)
    }

    /// Principal term `p_0`.
    pub fn principal(&self) -> &TabulatedSymbol {
        &self.terms[0].1
    }

    /// Analytic companions `(1/α!) ∂_y^α D_ξ^α a |_{y=x}` with exact
    /// ξ-derivatives; entries where the amplitude is singular are set to 0.
    pub fn analytic_terms(&self, a: &dyn PointAmplitude) -> Result<Vec<(Vec<usize>, TabulatedSymbol)>> {
        let grid = self.grid;
        let ctx = GridCtx::new(grid);
        let h = grid.spacing();
        let mut out = Vec::new();
        for (alpha, _) in &self.terms {
            let st = stencil(alpha);
            let ord = multi::order(alpha);
            let di = Complex64::new(0.0, -1.0).powi(ord as i32) / (multi::factorial(alpha) * h.powi(ord as i32));
            let rows: Vec<Result<Vec<Complex64>>> = exec::map_indexed(grid.len(), |i| {
                let x = &ctx.nodes[i];
                let mut row = vec![ZERO; grid.len()];
                for (k, r) in row.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for (s, c) in &st {
                        let y: Vec<f64> = (0..grid.dim).map(|a| x[a] + s[a] as f64 * h).collect();
                        let j = a.xi_jet(x, &y, &ctx.freqs[k]).ok_or_else(|| {
                            Error::Capability(format!("amplitude '{}' has no ξ-jets", a.name()))
                        })?;
                        acc += j.derivative_multi(alpha) * *c;
                    }
                    let v = acc * di;
                    *r = if v.re.is_finite() && v.im.is_finite() { v } else { ZERO };
                }
                Ok(row)
            });
            let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
            out.push((
                alpha.clone(),
                TabulatedSymbol::new(format!("analytic p_{alpha:?}"), grid, a.order() - ord as f64, rows)?,
            ));
        }
        Ok(out)
    }
}

/// Reduces an amplitude to x-form up to order `l`.
pub fn reduce_to_x_form(a: Arc<dyn Amplitude>, grid: TorusGrid, l: usize) -> Result<XFormExpansion> {
    if l as f64 >= a.hoelder() {
        return Err(Error::Hypothesis(format!(
            "expansion order {l} needs l < τ = {}",
            a.hoelder()
        )));
    }
    if l > 4 {
        return Err(Error::Capability("expansion order above 4".into()));
    }
    if a.dim() != grid.dim {
        return Err(Error::GridMismatch("amplitude and grid dimensions differ".into()));
    }
    let ctx = GridCtx::new(grid);
    let h = grid.spacing();
    let total = grid.len();
    let alphas = multi::up_to(grid.dim, l);
    let mut coeffs = Vec::with_capacity(alphas.len());
    let mut terms = Vec::with_capacity(alphas.len());
    for alpha in &alphas {
        let st = stencil(alpha);
        let ord = multi::order(alpha);
        let scale = 1.0 / (multi::factorial(alpha) * h.powi(ord as i32));
        let rows: Vec<Vec<Complex64>> = exec::map_indexed(total, |i| {
            let mut acc = vec![ZERO; total];
            let mut buf = vec![ZERO; total];
            for (s, c) in &st {
                let j = ctx.shifted(i, s);
                a.row(&ctx, i, j, &mut buf);
                for (o, b) in acc.iter_mut().zip(&buf) {
                    *o += b * *c;
                }
            }
            if ord > 0 {
                acc.iter_mut().for_each(|v| *v *= scale);
            }
            acc
        });
        let p_rows: Vec<Vec<Complex64>> = exec::map_indexed(total, |i| lattice_derivative(&grid, &rows[i], alpha));
        terms.push((
            alpha.clone(),
            TabulatedSymbol::new(format!("p_{alpha:?}"), grid, a.order() - ord as f64, p_rows)?,
        ));
        coeffs.push(rows);
    }
    let integral_remainder = if a.as_point().is_some() {
        let top: Vec<usize> = alphas
            .iter()
            .enumerate()
            .filter(|(_, al)| multi::order(al) == l)
            .map(|(k, _)| k)
            .collect();
        let (nodes, weights) = gauss_legendre_unit(16);
        Some(Arc::new(IntegralRemainder {
            a: a.clone(),
            l,
            grid,
            alphas: top.iter().map(|&k| alphas[k].clone()).collect(),
            diagonal: top.iter().map(|&k| coeffs[k].clone()).collect(),
            nodes,
            weights,
        }))
    } else {
        None
    };
    let remainder = Arc::new(ResidualRemainder {
        a,
        grid,
        alphas,
        coeffs,
    });
    Ok(XFormExpansion {
        l,
        grid,
        terms,
        remainder,
        integral_remainder,
    })
}

/// `max_{i,k} |R(x_i, x_i, ξ_k)| / ⟨ξ_k⟩^m`.
pub fn diagonal_residual(r: &dyn Amplitude, grid: TorusGrid) -> f64 {
    let ctx = GridCtx::new(grid);
    let m = r.order();
    let vals = exec::map_indexed(grid.len(), |i| {
        let mut buf = vec![ZERO; grid.len()];
        r.row(&ctx, i, i, &mut buf);
        buf.iter()
            .enumerate()
            .map(|(k, v)| v.norm() / bracket(&ctx.freqs[k]).powf(m))
            .fold(0.0, f64::max)
    });
    vals.into_iter().fold(0.0, f64::max)
}
