//! Quantization of symbols and amplitudes on a torus.
//!
//! x-form: `op(p)u(x_i) = Σ_k e^{iξ_k·x_i} p(x_i, ξ_k) û_k`.
//!
//! (x,y)-form: `op(a)u(x_i) = N^{-n} Σ_j Σ_k e^{i(x_i-y_j)·ξ_k} a(x_i, y*_j, ξ_k) u_j`
//! with the lifted point `y*_j = x_i + wrap(y_j - x_i)`, `wrap` into
//! `[-L/2, L/2)`. For a y-independent amplitude both agree exactly. Amplitudes
//! that depend on y should be L-periodic in y, or be read as functions of
//! the lifted point.

mod amplitudes;
mod commutator;
mod dyadic;
mod poisson;
mod reduce;

pub use amplitudes::*;
pub use commutator::{commutator_symbol, CommutatorMode, SmoothFunction};
pub use dyadic::{dyadic_decay_study, dyadic_phi, dyadic_psi, kernel_dyadic, partition_residual, DecayStudy};
pub use poisson::{poisson_apply, poisson_profile, BoundaryData, PoissonResult};
pub use reduce::{
    diagonal_residual, lattice_derivative, reduce_to_x_form, IntegralRemainder, ResidualRemainder, XFormExpansion,
};

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{GridFunction, TorusGrid};
use crate::jet::Jet;
use crate::symbols::Symbol;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Default operation budget for (x,y)-form sums.
pub const DEFAULT_MAX_FLOPS: f64 = 1e10;
/// Environment variable overriding the default budget.
pub const MAX_FLOPS_ENV: &str = "FRACDO_MAX_FLOPS";

/// Budget from `FRACDO_MAX_FLOPS`, or the default.
pub fn budget_from_env() -> f64 {
    std::env::var(MAX_FLOPS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|v| *v > 0.0)
        .unwrap_or(DEFAULT_MAX_FLOPS)
}

/// A symbol sampled on a grid: `p(x_i, ξ_k)` for all frequencies at node i.
pub trait GridSymbol: Send + Sync {
    fn dim(&self) -> usize;
    fn x_dependent(&self) -> bool;
    fn row(&self, grid: &TorusGrid, i: usize) -> Result<Vec<Complex64>>;
}

impl<S: Symbol + ?Sized> GridSymbol for S {
    fn dim(&self) -> usize {
        Symbol::dim(self)
    }
    fn x_dependent(&self) -> bool {
        self.depends_on_x()
    }
    fn row(&self, grid: &TorusGrid, i: usize) -> Result<Vec<Complex64>> {
        if grid.dim != Symbol::dim(self) {
            return Err(Error::GridMismatch("symbol and grid dimensions differ".into()));
        }
        let x = grid.node(i);
        Ok((0..grid.len()).map(|k| self.value(&x, &grid.freq(k))).collect())
    }
}

/// Symbol values stored on a grid (one row per node, or a single row when
/// x-independent).
#[derive(Clone, Debug)]
pub struct TabulatedSymbol {
    pub name: String,
    pub grid: TorusGrid,
    pub order: f64,
    pub rows: Vec<Vec<Complex64>>,
}

impl TabulatedSymbol {
    pub fn new(name: impl Into<String>, grid: TorusGrid, order: f64, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if !(rows.len() == 1 || rows.len() == grid.len()) || rows.iter().any(|r| r.len() != grid.len()) {
            return Err(Error::GridMismatch("tabulated symbol has the wrong shape".into()));
        }
        Ok(TabulatedSymbol {
            name: name.into(),
            grid,
            order,
            rows,
        })
    }

    pub fn from_symbol(sym: &dyn GridSymbol, grid: TorusGrid, order: f64, name: impl Into<String>) -> Result<Self> {
        let rows = if sym.x_dependent() {
            (0..grid.len()).map(|i| sym.row(&grid, i)).collect::<Result<_>>()?
        } else {
            vec![sym.row(&grid, 0)?]
        };
        Self::new(name, grid, order, rows)
    }

    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        if self.rows.len() == 1 {
            self.rows[0][k]
        } else {
            self.rows[i][k]
        }
    }
}

impl GridSymbol for TabulatedSymbol {
    fn dim(&self) -> usize {
        self.grid.dim
    }
    fn x_dependent(&self) -> bool {
        self.rows.len() > 1
    }
    fn row(&self, grid: &TorusGrid, i: usize) -> Result<Vec<Complex64>> {
        self.grid.check_same(grid)?;
        Ok(if self.rows.len() == 1 {
            self.rows[0].clone()
        } else {
            self.rows[i].clone()
        })
    }
}

/// `e^{2πi m/N}` for `m = 0..N`.
pub(crate) fn roots_of_unity(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64))
        .collect()
}

/// `e^{iξ_k·x_i}` from FFT slot `k` and node `i`.
fn node_phase(grid: &TorusGrid, roots: &[Complex64], i: usize, k: usize) -> Complex64 {
    let n = grid.n;
    let mi = grid.unflatten(i);
    let mk = grid.unflatten(k);
    let mut idx = 0;
    let mut parity = 0;
    for a in 0..grid.dim {
        idx += mk[a] * mi[a];
        parity += mk[a];
    }
    let v = roots[idx % n];
    if parity % 2 == 0 {
        v
    } else {
        -v
    }
}

/// `e^{i(x_i - y_j)·ξ_k}` from node indices.
fn offset_phase(grid: &TorusGrid, roots: &[Complex64], i: usize, j: usize, k: usize) -> Complex64 {
    let n = grid.n;
    let mi = grid.unflatten(i);
    let mj = grid.unflatten(j);
    let mk = grid.unflatten(k);
    let mut idx = 0;
    for a in 0..grid.dim {
        idx += (mi[a] + n - mj[a]) % n * mk[a];
    }
    roots[idx % n]
}

/// Kohn–Nirenberg quantization. Uses a single FFT multiplier when the symbol
/// does not depend on x, a per-node sum otherwise.
pub fn apply_x_form(p: &dyn GridSymbol, u: &GridFunction) -> Result<GridFunction> {
    let grid = u.grid;
    if p.dim() != grid.dim {
        return Err(Error::GridMismatch("symbol and grid dimensions differ".into()));
    }
    let mut c = u.forward();
    if !p.x_dependent() {
        let row = p.row(&grid, 0)?;
        for (v, m) in c.iter_mut().zip(&row) {
            *v *= m;
        }
        return GridFunction::inverse(grid, &c);
    }
    let roots = roots_of_unity(grid.n);
    let rows: Vec<Result<Complex64>> = exec::map_indexed(grid.len(), |i| {
        let row = p.row(&grid, i)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..grid.len() {
            acc += node_phase(&grid, &roots, i, k) * row[k] * c[k];
        }
        Ok(acc)
    });
    c = rows.into_iter().collect::<Result<_>>()?;
    GridFunction::new(grid, c)
}

/// Grid data shared by amplitude evaluations.
pub struct GridCtx {
    pub grid: TorusGrid,
    pub nodes: Vec<Vec<f64>>,
    pub freqs: Vec<Vec<f64>>,
}

impl GridCtx {
    pub fn new(grid: TorusGrid) -> Self {
        GridCtx {
            grid,
            nodes: grid.nodes(),
            freqs: grid.freqs(),
        }
    }

    /// `wrap(y_j - x_i)` componentwise.
    pub fn offset(&self, i: usize, j: usize) -> [f64; 2] {
        let (mi, mj) = (self.grid.unflatten(i), self.grid.unflatten(j));
        let h = self.grid.spacing();
        let mut w = [0.0; 2];
        for a in 0..self.grid.dim {
            w[a] = self.grid.wrap_cells(mj[a] as i64 - mi[a] as i64) as f64 * h;
        }
        w
    }

    /// The lifted point `x_i + wrap(y_j - x_i)`.
    pub fn lifted(&self, i: usize, j: usize) -> [f64; 2] {
        let w = self.offset(i, j);
        let mut y = [0.0; 2];
        for a in 0..self.grid.dim {
            y[a] = self.nodes[i][a] + w[a];
        }
        y
    }

    /// Node index displaced from `i` by `shift` cells (periodically).
    pub fn shifted(&self, i: usize, shift: &[i64]) -> usize {
        let n = self.grid.n as i64;
        let m = self.grid.unflatten(i);
        let mut idx = 0usize;
        for a in 0..self.grid.dim {
            let v = (m[a] as i64 + shift[a]).rem_euclid(n) as usize;
            idx = idx * self.grid.n + v;
        }
        idx
    }
}

/// An amplitude `a(x, y, ξ)` that can be evaluated at any point.
pub trait PointAmplitude: Send + Sync {
    fn dim(&self) -> usize;
    fn order(&self) -> f64;
    fn hoelder(&self) -> f64 {
        f64::INFINITY
    }
    fn name(&self) -> String;
    fn value(&self, x: &[f64], y: &[f64], xi: &[f64]) -> Complex64;
    /// Jet in ξ at `(x, y, ξ)`, when available.
    fn xi_jet(&self, _x: &[f64], _y: &[f64], _xi: &[f64]) -> Option<Jet> {
        None
    }
    fn vanishes_on_diagonal(&self) -> bool {
        false
    }
    /// `value(x, y, ξ_k)` for every frequency; override when per-pair work
    /// can be shared across ξ.
    fn values(&self, x: &[f64], y: &[f64], freqs: &[Vec<f64>], out: &mut [Complex64]) {
        for (o, xi) in out.iter_mut().zip(freqs) {
            *o = self.value(x, y, xi);
        }
    }
}

/// An amplitude as seen by the (x,y)-form sum: values at node `i`, lifted
/// node `j` and every frequency.
pub trait Amplitude: Send + Sync {
    fn dim(&self) -> usize;
    fn order(&self) -> f64;
    fn hoelder(&self) -> f64;
    fn name(&self) -> String;
    fn vanishes_on_diagonal(&self) -> bool;
    /// Writes `a(x_i, y*_j, ξ_k)` for all k into `out`.
    fn row(&self, ctx: &GridCtx, i: usize, j: usize, out: &mut [Complex64]);
    /// Pointwise access, when the amplitude is not tied to a grid.
    fn as_point(&self) -> Option<&dyn PointAmplitude> {
        None
    }
}

impl<T: PointAmplitude> Amplitude for T {
    fn dim(&self) -> usize {
        PointAmplitude::dim(self)
    }
    fn order(&self) -> f64 {
        PointAmplitude::order(self)
    }
    fn hoelder(&self) -> f64 {
        PointAmplitude::hoelder(self)
    }
    fn name(&self) -> String {
        PointAmplitude::name(self)
    }
    fn vanishes_on_diagonal(&self) -> bool {
        PointAmplitude::vanishes_on_diagonal(self)
    }
    fn row(&self, ctx: &GridCtx, i: usize, j: usize, out: &mut [Complex64]) {
        let dim = ctx.grid.dim;
        let y = ctx.lifted(i, j);
        PointAmplitude::values(self, &ctx.nodes[i], &y[..dim], &ctx.freqs, out);
    }
    fn as_point(&self) -> Option<&dyn PointAmplitude> {
        Some(self)
    }
}

/// Whether the oscillatory-integral hypothesis `m < τ` holds.
pub fn oscillatory_hypothesis_holds(a: &dyn Amplitude) -> bool {
    a.order() < a.hoelder()
}

/// Estimated operation count of an (x,y)-form sum on `grid`.
pub fn xy_form_cost(grid: &TorusGrid) -> f64 {
    8.0 * (grid.len() as f64).powi(3)
}

/// Direct double sum for the (x,y)-form operator. Parallel over output
/// nodes; the j- and k-sums run in a fixed order.
pub fn apply_xy_form(a: &dyn Amplitude, u: &GridFunction, max_flops: f64) -> Result<GridFunction> {
    let grid = u.grid;
    if a.dim() != grid.dim {
        return Err(Error::GridMismatch("amplitude and grid dimensions differ".into()));
    }
    let cost = xy_form_cost(&grid);
    if cost > max_flops {
        return Err(Error::Budget {
            required: cost,
            budget: max_flops,
        });
    }
    let ctx = GridCtx::new(grid);
    let roots = roots_of_unity(grid.n);
    let total = grid.len();
    let weight = 1.0 / total as f64;
    let values = exec::map_indexed(total, |i| {
        let mut buf = vec![Complex64::new(0.0, 0.0); total];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..total {
            if u.values[j] == Complex64::new(0.0, 0.0) {
                continue;
            }
            a.row(&ctx, i, j, &mut buf);
            let mut kern = Complex64::new(0.0, 0.0);
            for (k, b) in buf.iter().enumerate() {
                kern += offset_phase(&grid, &roots, i, j, k) * b;
            }
            acc += kern * u.values[j];
        }
        acc * weight
    });
    GridFunction::new(grid, values)
}

/// Convenience: wraps any symbol as a shared trait object.
pub fn shared<S: Symbol + 'static>(s: S) -> Arc<dyn Symbol> {
    Arc::new(s)
}

/// Norm of `op(p): H^{s+m} → H^s` on the grid, by power iteration on
/// `A*A` with `A = Λ^s op(p) Λ^{-s-m}`, `Λ^r` the multiplier `⟨ξ⟩^r`.
pub fn sobolev_operator_norm(p: &dyn GridSymbol, grid: TorusGrid, s: f64, m: f64, iters: usize) -> Result<f64> {
    use crate::grid::bracket;
    let total = grid.len();
    let cols: Vec<Result<Vec<Complex64>>> = exec::map_indexed(total, |j| {
        let mut e = GridFunction::zeros(grid);
        e.values[j] = Complex64::new(1.0, 0.0);
        let v = e.multiply_spectrum(|xi| Complex64::new(bracket(xi).powf(-s - m), 0.0));
        let w = apply_x_form(p, &v)?;
        Ok(w.multiply_spectrum(|xi| Complex64::new(bracket(xi).powf(s), 0.0)).values)
    });
    let cols = cols.into_iter().collect::<Result<Vec<_>>>()?;
    let a = nalgebra::DMatrix::from_fn(total, total, |i, j| cols[j][i]);
    let ah = a.adjoint();
    let mut v = nalgebra::DVector::from_fn(total, |i, _| Complex64::new(1.0 + (i % 7) as f64 * 0.1, 0.0));
    let mut lambda = 0.0;
    for _ in 0..iters.max(1) {
        let w = &ah * (&a * &v);
        let nrm = w.norm();
        if nrm == 0.0 {
            return Ok(0.0);
        }
        lambda = nrm / v.norm();
        v = w / Complex64::new(nrm, 0.0);
    }
    Ok(lambda.sqrt())
}
