//! Commutator amplitudes `[op(p), φ] = op(a)` with
//! `a(x, y, ξ) = Σ_k D_{ξ_k} p(x, ξ) Φ_k(x, y)`,
//! `Φ(x, y) = ∫₀¹ ∇φ(x + t(y - x)) dt`.

use super::{lattice_derivative, Amplitude, GridCtx, PointAmplitude};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::TorusGrid;
use crate::jet::Jet;
use crate::quadrature::gauss_legendre_unit;
use crate::symbols::Symbol;
use num_complex::Complex64;
use std::sync::Arc;

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> [f64; 2] + Send + Sync;

/// A smooth real function with an optional analytic gradient.
#[derive(Clone)]
pub struct SmoothFunction {
    pub name: String,
    pub dim: usize,
    pub f: Arc<ScalarFn>,
    pub grad: Option<Arc<GradFn>>,
}

impl SmoothFunction {
    pub fn new(name: impl Into<String>, dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        SmoothFunction {
            name: name.into(),
            dim,
            f: Arc::new(f),
            grad: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    /// Analytic gradient, or fourth-order central differences.
    pub fn gradient(&self, x: &[f64]) -> [f64; 2] {
        if let Some(g) = &self.grad {
            return g(x);
        }
        let mut out = [0.0; 2];
        let mut p = x.to_vec();
        for (k, o) in out.iter_mut().enumerate().take(self.dim) {
            let h = 1e-3 * (1.0 + x[k].abs());
            let mut at = |s: f64| {
                p[k] = x[k] + s * h;
                let v = (self.f)(&p);
                p[k] = x[k];
                v
            };
            *o = (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h);
        }
        out
    }
}

/// How `D_ξ p` enters the amplitude.
#[derive(Clone, Copy, Debug)]
pub enum CommutatorMode {
    /// Exact ξ-derivatives from jets.
    Analytic,
    /// Lattice derivatives on the given grid; the discrete commutator is
    /// then reproduced up to round-off.
    Lattice(TorusGrid),
}

/// `Φ(x, y)` by 16-point Gauss–Legendre.
struct MeanGradient {
    phi: SmoothFunction,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl MeanGradient {
    fn new(phi: SmoothFunction) -> Self {
        let (nodes, weights) = gauss_legendre_unit(16);
        MeanGradient { phi, nodes, weights }
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> [f64; 2] {
        let dim = x.len();
        let mut out = [0.0; 2];
        let mut z = vec![0.0; dim];
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            for a in 0..dim {
                z[a] = x[a] + t * (y[a] - x[a]);
            }
            let g = self.phi.gradient(&z);
            for a in 0..dim {
                out[a] += w * g[a];
            }
        }
        out
    }
}

fn finite(v: Complex64) -> Complex64 {
    if v.re.is_finite() && v.im.is_finite() {
        v
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Commutator amplitude with analytic `D_ξ p`. Entries where p is not
/// differentiable (ξ = 0 for unexcised symbols) are set to 0.
pub struct AnalyticCommutator {
    p: Arc<dyn Symbol>,
    phi: MeanGradient,
}

impl AnalyticCommutator {
    fn d_xi(&self, x: &[f64], xi: &[f64]) -> [Complex64; 2] {
        let mi = Complex64::new(0.0, -1.0);
        let mut out = [Complex64::new(0.0, 0.0); 2];
        if let Some(j) = self.p.jet(x, xi) {
            for (k, o) in out.iter_mut().enumerate().take(xi.len()) {
                let mut e = vec![0; xi.len()];
                e[k] = 1;
                *o = finite(mi * j.derivative_multi(&e));
            }
        }
        out
    }
}

impl PointAmplitude for AnalyticCommutator {
    fn dim(&self) -> usize {
        self.p.dim()
    }
    fn order(&self) -> f64 {
        self.p.order() - 1.0
    }
    fn hoelder(&self) -> f64 {
        self.p.hoelder()
    }
    fn name(&self) -> String {
        format!("[{}, {}]", self.p.name(), self.phi.phi.name)
    }
    fn value(&self, x: &[f64], y: &[f64], xi: &[f64]) -> Complex64 {
        let d = self.d_xi(x, xi);
        let g = self.phi.eval(x, y);
        (0..x.len()).map(|k| d[k] * g[k]).sum()
    }
    fn xi_jet(&self, x: &[f64], y: &[f64], xi: &[f64]) -> Option<Jet> {
        let j = self.p.jet(x, xi)?;
        let g = self.phi.eval(x, y);
        let mi = Complex64::new(0.0, -1.0);
        // D_ξk of a jet, truncated to the lower degree.
        let mut out = Jet::constant(Complex64::new(0.0, 0.0));
        for (k, gk) in g.iter().enumerate().take(x.len()) {
            let mut dk = Jet::constant(Complex64::new(0.0, 0.0));
            for a in 0..=4usize {
                for b in 0..=(4 - a) {
                    let (na, nb) = if k == 0 { (a + 1, b) } else { (a, b + 1) };
                    if na + nb > 4 {
                        continue;
                    }
                    let f = if k == 0 { na as f64 } else { nb as f64 };
                    dk.set_coef(a, b, j.coef(na, nb) * f);
                }
            }
            out = out + dk.scale(mi * gk);
        }
        Some(out)
    }
}

/// Commutator amplitude with lattice `D_ξ p`, tied to one grid.
pub struct LatticeCommutator {
    p: Arc<dyn Symbol>,
    phi: MeanGradient,
    grid: TorusGrid,
    /// `[k][i][ξ]`, or a single row per k when p does not depend on x.
    table: Vec<Vec<Vec<Complex64>>>,
}

impl Amplitude for LatticeCommutator {
    fn dim(&self) -> usize {
        self.p.dim()
    }
    fn order(&self) -> f64 {
        self.p.order() - 1.0
    }
    fn hoelder(&self) -> f64 {
        self.p.hoelder()
    }
    fn name(&self) -> String {
        format!("[{}, {}] (lattice)", self.p.name(), self.phi.phi.name)
    }
    fn vanishes_on_diagonal(&self) -> bool {
        false
    }
    fn row(&self, ctx: &GridCtx, i: usize, j: usize, out: &mut [Complex64]) {
        assert!(ctx.grid == self.grid, "lattice commutator used on a different grid");
        let dim = ctx.grid.dim;
        let y = ctx.lifted(i, j);
        let g = self.phi.eval(&ctx.nodes[i], &y[..dim]);
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (k, tab) in self.table.iter().enumerate() {
            let row = if tab.len() == 1 { &tab[0] } else { &tab[i] };
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * g[k];
            }
        }
    }
}

/// Amplitude of `[op(p), φ]`, of order `m - 1`.
pub fn commutator_symbol(p: Arc<dyn Symbol>, phi: SmoothFunction, mode: CommutatorMode) -> Result<Arc<dyn Amplitude>> {
    if phi.dim != p.dim() {
        return Err(Error::Argument("function and symbol dimensions differ".into()));
    }
    let phi = MeanGradient::new(phi);
    match mode {
        CommutatorMode::Analytic => {
            if p.jet(&vec![0.0; p.dim()], &vec![1.0; p.dim()]).is_none() {
                return Err(Error::Capability(format!("symbol '{}' has no ξ-jets", p.name())));
            }
            Ok(Arc::new(AnalyticCommutator { p, phi }))
        }
        CommutatorMode::Lattice(grid) => {
            if grid.dim != p.dim() {
                return Err(Error::GridMismatch("symbol and grid dimensions differ".into()));
            }
            let rows = if p.depends_on_x() { grid.len() } else { 1 };
            let freqs = grid.freqs();
            let base: Vec<Vec<Complex64>> = exec::map_indexed(rows, |i| {
                let x = grid.node(i);
                freqs.iter().map(|xi| p.value(&x, xi)).collect()
            });
            let table = (0..grid.dim)
                .map(|k| {
                    let mut e = vec![0; grid.dim];
                    e[k] = 1;
                    exec::map_indexed(rows, |i| lattice_derivative(&grid, &base[i], &e))
                })
                .collect();
            Ok(Arc::new(LatticeCommutator { p, phi, grid, table }))
        }
    }
}
