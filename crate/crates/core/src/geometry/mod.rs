//! Coordinate changes, transformed symbols, boundary rescaling, distance
//! functions and boundary charts.

mod atlas;
mod distance;
mod scaling;
mod spline;
mod transform;

pub use atlas::{build_atlas, read_boundary_csv, write_boundary_csv, Chart, ChartAtlas, ClosedCurve};
pub use distance::{distance_function, DistanceFunctions, DomainSpec};
pub use scaling::{rescale_boundary, rescale_symbol, scaling_sequence, RadialCutoff, RescaledBoundary, RescaledSymbol};
pub use spline::CubicSpline;
pub use transform::{
    auto_cutoff_radius, expand_transformed, far_field_apply, principal_distance, pullback_apply, transform_symbol,
    transformed_parity_residual, TransformedExpansion, TransformedSymbol,
};

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::quadrature::gauss_legendre_unit;
use crate::grid::hoelder::ctau_norm_points;
use nalgebra::Matrix2;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use std::fmt;
use std::sync::Arc;

/// Derivatives of a boundary function kept by [`BoundaryFunction`].
pub const MAX_BOUNDARY_DERIVATIVE: usize = 3;

/// `[γ, γ', γ'', γ''']` at a point.
pub type Derivatives = [f64; MAX_BOUNDARY_DERIVATIVE + 1];

/// Points are padded to two components; the unused one is ignored.
pub type Point = [f64; 2];

/// Jacobians are 2×2; in 1D the lower-right entry is 1 and the off-diagonal
/// entries vanish, so determinants and inverses need no special casing.
pub type Jacobian = Matrix2<f64>;

const NORMALIZED_TOL: f64 = 1e-12;

/// A graph function `γ: ℝ → ℝ` of class `C^{1+τ}`.
#[derive(Clone)]
pub struct BoundaryFunction {
    pub name: String,
    pub hoelder: f64,
    /// `γ(0) = 0` and `γ'(0) = 0`.
    pub normalized: bool,
    eval: Arc<dyn Fn(f64) -> Derivatives + Send + Sync>,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryFunction({}, τ={})", self.name, self.hoelder)
    }
}

fn jet_derivatives(j: &Jet) -> Derivatives {
    let mut d = [0.0; MAX_BOUNDARY_DERIVATIVE + 1];
    for (k, v) in d.iter_mut().enumerate() {
        *v = j.derivative(k, 0).re;
    }
    d
}

fn jet_sin(t: Jet) -> Jet {
    let i = Complex64::new(0.0, 1.0);
    let e = t.scale(i).exp();
    let f = t.scale(-i).exp();
    (e - f).scale(Complex64::new(0.0, -0.5))
}

impl BoundaryFunction {
    pub fn new(name: impl Into<String>, hoelder: f64, eval: impl Fn(f64) -> Derivatives + Send + Sync + 'static) -> Self {
        let d0 = eval(0.0);
        BoundaryFunction {
            name: name.into(),
            hoelder,
            normalized: d0[0].abs() <= NORMALIZED_TOL && d0[1].abs() <= NORMALIZED_TOL,
            eval: Arc::new(eval),
        }
    }

    /// Closed form written once over jets; derivatives come out exactly.
    pub fn from_jet(name: impl Into<String>, hoelder: f64, f: impl Fn(Jet) -> Jet + Send + Sync + 'static) -> Self {
        Self::new(name, hoelder, move |s| jet_derivatives(&f(Jet::variable(0, s))))
    }

    pub fn zero() -> Self {
        Self::new("0", f64::INFINITY, |_| [0.0; MAX_BOUNDARY_DERIVATIVE + 1])
    }

    /// `ε sin(ω s)`.
    pub fn eps_sin(eps: f64, omega: f64) -> Self {
        Self::from_jet(format!("{eps}*sin({omega}s)"), f64::INFINITY, move |t| {
            jet_sin(t.scale(omega.into())).scale(eps.into())
        })
    }

    /// `s²`, used at the `τ = 1` scale.
    pub fn square() -> Self {
        Self::from_jet("s^2", 1.0, |t| t * t)
    }

    /// `sin² s`, used at the `τ = 1` scale.
    pub fn sin_squared() -> Self {
        Self::from_jet("sin^2(s)", 1.0, |t| {
            let s = jet_sin(t);
            s * s
        })
    }

    /// `|s|^{1+τ}`: exactly `C^{1+τ}` at the origin.
    pub fn power(tau: f64) -> Self {
        let p = 1.0 + tau;
        Self::new(format!("|s|^{p}"), tau, move |s| {
            let a = s.abs();
            let sg = s.signum();
            let mut d = [a.powf(p), p * sg * a.powf(p - 1.0), 0.0, 0.0];
            if a > 0.0 {
                d[2] = p * (p - 1.0) * a.powf(p - 2.0);
                d[3] = sg * p * (p - 1.0) * (p - 2.0) * a.powf(p - 3.0);
            }
            d
        })
    }

    pub fn with_hoelder(mut self, tau: f64) -> Self {
        self.hoelder = tau;
        self
    }

    /// `c·γ`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        BoundaryFunction {
            name: format!("{c}*({})", self.name),
            hoelder: self.hoelder,
            normalized: self.normalized,
            eval: Arc::new(move |s| inner(s).map(|v| c * v)),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        (self.eval)(s)[0]
    }

    pub fn derivatives(&self, s: f64) -> Derivatives {
        (self.eval)(s)
    }

    pub fn derivative(&self, s: f64, k: usize) -> f64 {
        (self.eval)(s)[k]
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            let d = self.derivatives(0.0);
            Err(Error::Geometry(format!(
                "boundary function '{}' is not normalized: γ(0) = {:.3e}, γ'(0) = {:.3e}",
                self.name, d[0], d[1]
            )))
        }
    }

    /// Discrete `C^{1+τ}` norm on `samples` equispaced points of
    /// `[-radius, radius]`; Hölder pairs at distance at most 1.
    pub fn norm_c1tau(&self, radius: f64, samples: usize) -> f64 {
        let points: Vec<Vec<f64>> = (0..samples)
            .map(|i| vec![-radius + 2.0 * radius * i as f64 / (samples - 1) as f64])
            .collect();
        let derivs: Vec<Derivatives> = points.iter().map(|p| self.derivatives(p[0])).collect();
        let order = if self.hoelder.is_finite() {
            (1.0 + self.hoelder).min(MAX_BOUNDARY_DERIVATIVE as f64)
        } else {
            2.0
        };
        ctau_norm_points(&points, order, 1.0, |i, beta| Complex64::new(derivs[i][beta[0]], 0.0))
    }
}

/// A bi-Lipschitz map of `ℝⁿ` (n = 1, 2) with its inverse and Jacobian.
#[derive(Clone)]
pub struct Diffeomorphism {
    pub name: String,
    pub dim: usize,
    /// Hölder exponent of `∇F` (the map is `C^{1+τ}`).
    pub hoelder: f64,
    map: Arc<dyn Fn(&[f64]) -> Point + Send + Sync>,
    inverse: Arc<dyn Fn(&[f64]) -> Point + Send + Sync>,
    jacobian: Arc<dyn Fn(&[f64]) -> Jacobian + Send + Sync>,
    /// `c₀ <= |det ∇F| <= C₀` on the sample box.
    pub det_bounds: (f64, f64),
}

impl fmt::Debug for Diffeomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Diffeomorphism({}, dim={})", self.name, self.dim)
    }
}

/// Half-width of the box on which determinant bounds are sampled.
pub const SAMPLE_BOX: f64 = 4.0;

fn pad(x: &[f64]) -> Point {
    [x[0], if x.len() > 1 { x[1] } else { 0.0 }]
}

/// Equispaced samples of `[-half, half]^dim`, `per_dim` per axis.
pub fn box_samples(dim: usize, half: f64, per_dim: usize) -> Vec<Point> {
    let c = |i: usize| -half + 2.0 * half * i as f64 / (per_dim - 1) as f64;
    if dim == 1 {
        (0..per_dim).map(|i| [c(i), 0.0]).collect()
    } else {
        (0..per_dim * per_dim).map(|k| [c(k / per_dim), c(k % per_dim)]).collect()
    }
}

fn newton_inverse(
    dim: usize,
    map: &(dyn Fn(&[f64]) -> Point + Send + Sync),
    jac: &(dyn Fn(&[f64]) -> Jacobian + Send + Sync),
    y: &[f64],
) -> Point {
    let target = pad(y);
    let mut x = target;
    for _ in 0..100 {
        let f = map(&x[..dim]);
        let r = nalgebra::Vector2::new(f[0] - target[0], if dim > 1 { f[1] - target[1] } else { 0.0 });
        if r.norm() < 1e-15 * (1.0 + target[0].abs() + target[1].abs()) {
            break;
        }
        let Some(ji) = jac(&x[..dim]).try_inverse() else {
            break;
        };
        let step = ji * r;
        x[0] -= step[0];
        if dim > 1 {
            x[1] -= step[1];
        }
    }
    x
}

impl Diffeomorphism {
    /// General map with Newton inversion.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        hoelder: f64,
        map: impl Fn(&[f64]) -> Point + Send + Sync + 'static,
        jacobian: impl Fn(&[f64]) -> Jacobian + Send + Sync + 'static,
    ) -> Result<Self> {
        let map: Arc<dyn Fn(&[f64]) -> Point + Send + Sync> = Arc::new(map);
        let jacobian: Arc<dyn Fn(&[f64]) -> Jacobian + Send + Sync> = Arc::new(jacobian);
        let (m, j) = (map.clone(), jacobian.clone());
        let inverse = Arc::new(move |y: &[f64]| newton_inverse(dim, m.as_ref(), j.as_ref(), y));
        Self::assemble(name.into(), dim, hoelder, map, inverse, jacobian)
    }

    fn assemble(
        name: String,
        dim: usize,
        hoelder: f64,
        map: Arc<dyn Fn(&[f64]) -> Point + Send + Sync>,
        inverse: Arc<dyn Fn(&[f64]) -> Point + Send + Sync>,
        jacobian: Arc<dyn Fn(&[f64]) -> Jacobian + Send + Sync>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Argument(format!("diffeomorphisms need dimension 1 or 2, got {dim}")));
        }
        let mut f = Diffeomorphism {
            name,
            dim,
            hoelder,
            map,
            inverse,
            jacobian,
            det_bounds: (0.0, 0.0),
        };
        f.det_bounds = f.measure_det_bounds(&box_samples(dim, SAMPLE_BOX, if dim == 1 { 257 } else { 33 }));
        if !(f.det_bounds.0 > 0.0) {
            return Err(Error::Geometry(format!("'{}' degenerates: min |det ∇F| = {:.3e}", f.name, f.det_bounds.0)));
        }
        Ok(f)
    }

    pub fn identity(dim: usize) -> Self {
        Self::assemble(
            "identity".into(),
            dim,
            f64::INFINITY,
            Arc::new(pad),
            Arc::new(pad),
            Arc::new(|_: &[f64]| Jacobian::identity()),
        )
        .expect("identity is nondegenerate")
    }

    /// `x ↦ M x` (in 1D only `M[(0,0)]` is used).
    pub fn linear(dim: usize, m: Jacobian) -> Result<Self> {
        let m = if dim == 1 { Jacobian::new(m[(0, 0)], 0.0, 0.0, 1.0) } else { m };
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::Geometry("linear map is singular".into()))?;
        let apply = move |a: Jacobian| move |x: &[f64]| {
            let p = pad(x);
            let v = a * nalgebra::Vector2::new(p[0], p[1]);
            [v[0], v[1]]
        };
        Self::assemble(
            format!("linear[{:.4},{:.4};{:.4},{:.4}]", m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]),
            dim,
            f64::INFINITY,
            Arc::new(apply(m)),
            Arc::new(apply(inv)),
            Arc::new(move |_: &[f64]| m),
        )
    }

    /// `F_γ(x) = (x', x₂ - γ(x'))`, flattening `{x₂ > γ(x')}`.
    pub fn curved_halfspace(gamma: &BoundaryFunction) -> Self {
        let (g1, g2, g3) = (gamma.clone(), gamma.clone(), gamma.clone());
        Self::assemble(
            format!("F_gamma[{}]", gamma.name),
            2,
            gamma.hoelder,
            Arc::new(move |x: &[f64]| [x[0], x[1] - g1.value(x[0])]),
            Arc::new(move |y: &[f64]| [y[0], y[1] + g2.value(y[0])]),
            Arc::new(move |x: &[f64]| Jacobian::new(1.0, 0.0, -g3.derivative(x[0], 1), 1.0)),
        )
        .expect("unit determinant")
    }

    /// 1D shear `F(x) = x - γ(x)`; needs `|γ'| < 1`.
    pub fn shear_1d(gamma: &BoundaryFunction) -> Result<Self> {
        let (g1, g2) = (gamma.clone(), gamma.clone());
        Self::new(
            format!("shear[{}]", gamma.name),
            1,
            gamma.hoelder,
            move |x: &[f64]| [x[0] - g1.value(x[0]), 0.0],
            move |x: &[f64]| Jacobian::new(1.0 - g2.derivative(x[0], 1), 0.0, 0.0, 1.0),
        )
    }

    pub fn apply(&self, x: &[f64]) -> Point {
        (self.map)(x)
    }

    pub fn apply_inverse(&self, y: &[f64]) -> Point {
        (self.inverse)(y)
    }

    pub fn jacobian(&self, x: &[f64]) -> Jacobian {
        (self.jacobian)(x)
    }

    pub fn measure_det_bounds(&self, samples: &[Point]) -> (f64, f64) {
        samples.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), p| {
            let d = self.jacobian(&p[..self.dim]).determinant().abs();
            (lo.min(d), hi.max(d))
        })
    }

    /// `max |F⁻¹(F(x)) - x|` over the samples.
    pub fn inverse_error(&self, samples: &[Point]) -> f64 {
        samples
            .iter()
            .map(|p| {
                let x = &p[..self.dim];
                let back = self.apply_inverse(&self.apply(x)[..self.dim]);
                (0..self.dim).map(|a| (back[a] - x[a]).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `sup |∇F - I|` over the samples.
    pub fn distance_to_identity(&self, samples: &[Point]) -> f64 {
        samples
            .iter()
            .map(|p| (self.jacobian(&p[..self.dim]) - Jacobian::identity()).abs().max())
            .fold(0.0, f64::max)
    }
}

static GL8: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre_unit(8));

/// `A(x, y) = ∫₀¹ ∇F(x + t(y - x)) dt` with a flag for near-singularity.
#[derive(Clone, Copy, Debug)]
pub struct AveragedJacobian {
    pub matrix: Jacobian,
    pub det: f64,
    /// `|det A| < c₀/2`.
    pub flagged: bool,
}

/// Averaged Jacobian by 8-point Gauss–Legendre quadrature; exact `∇F(x)`
/// on the diagonal.
pub fn averaged_jacobian(f: &Diffeomorphism, x: &[f64], y: &[f64]) -> AveragedJacobian {
    let dim = f.dim;
    let matrix = if (0..dim).all(|a| x[a] == y[a]) {
        f.jacobian(x)
    } else {
        // quadrature of ∇F - ∇F(x), so constant Jacobians come out exactly
        let (nodes, weights) = &*GL8;
        let base = f.jacobian(x);
        let mut acc = Jacobian::zeros();
        let mut p = [0.0; 2];
        for (t, w) in nodes.iter().zip(weights) {
            for a in 0..dim {
                p[a] = x[a] + t * (y[a] - x[a]);
            }
            acc += (f.jacobian(&p[..dim]) - base) * *w;
        }
        let mut a = base + acc;
        if dim == 1 {
            a[(1, 1)] = 1.0;
        }
        a
    };
    let det = matrix.determinant();
    AveragedJacobian {
        matrix,
        det,
        flagged: det.abs() < 0.5 * f.det_bounds.0,
    }
}

/// Jet of `ξ ↦ g(Bξ)` at `ξ₀` from the jet of `g` at `Bξ₀`.
pub fn substitute_linear(jet: &Jet, b: &Jacobian, dim: usize) -> Jet {
    let zero = Jet::constant(Complex64::new(0.0, 0.0));
    let mut e = [zero; 2];
    for (a, ea) in e.iter_mut().enumerate().take(dim) {
        let mut acc = zero;
        for c in 0..dim {
            acc = acc + Jet::variable(c, 0.0).scale(Complex64::new(b[(a, c)], 0.0));
        }
        *ea = acc;
    }
    let one = Jet::constant(Complex64::new(1.0, 0.0));
    let mut out = zero;
    let mut pow0 = one;
    for i in 0..=crate::jet::MAX_DEGREE {
        let mut pow1 = one;
        for j in 0..=crate::jet::MAX_DEGREE - i {
            let c = jet.coef(i, j);
            if c != Complex64::new(0.0, 0.0) {
                out = out + (pow0 * pow1).scale(c);
            }
            if dim < 2 {
                break;
            }
            pow1 = pow1 * e[1];
        }
        pow0 = pow0 * e[0];
    }
    out.c[0] = jet.value();
    out
}
