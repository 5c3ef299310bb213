//! Symbols under coordinate changes.

use super::{averaged_jacobian, box_samples, substitute_linear, Diffeomorphism, Jacobian, Point, SAMPLE_BOX};
use crate::cutoff::plateau;
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::hoelder::ctau_norm_points;
use crate::grid::{bracket, GridFunction, TorusGrid};
use crate::jet::Jet;
use crate::quantize::{apply_x_form, GridSymbol, reduce_to_x_form, Amplitude, GridCtx, PointAmplitude, XFormExpansion};
use crate::symbols::{Parity, Symbol};
use num_complex::Complex64;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `q(x,y,ξ) = ψ(F(x)-F(y)) p(F(x), A^{-T}ξ) |det A|^{-1} |det ∇F(y)|`.
#[derive(Clone)]
pub struct TransformedSymbol {
    pub p: Arc<dyn Symbol>,
    pub f: Diffeomorphism,
    /// Cutoff radius δ; infinite when `A` is invertible everywhere.
    pub delta: f64,
}

/// Per-pair data: `F(x)`, `A^{-T}` and the scalar factor.
struct Pair {
    fx: Point,
    a_inv_t: Jacobian,
    factor: f64,
}

impl TransformedSymbol {
    fn pair(&self, x: &[f64], y: &[f64]) -> Pair {
        let dim = self.f.dim;
        let fx = self.f.apply(x);
        let fy = self.f.apply(y);
        let z = (0..dim).map(|a| (fx[a] - fy[a]).powi(2)).sum::<f64>().sqrt();
        let weight = if self.delta.is_finite() {
            plateau(z, 0.5 * self.delta, self.delta)
        } else {
            1.0
        };
        if weight == 0.0 {
            return Pair {
                fx,
                a_inv_t: Jacobian::identity(),
                factor: 0.0,
            };
        }
        let a = averaged_jacobian(&self.f, x, y);
        let a_inv_t = a.matrix.try_inverse().unwrap_or_else(Jacobian::zeros).transpose();
        let det_y = self.f.jacobian(y).determinant().abs();
        Pair {
            fx,
            a_inv_t,
            factor: weight * det_y / a.det.abs(),
        }
    }

    fn frequency(&self, pair: &Pair, xi: &[f64]) -> Point {
        let m = &pair.a_inv_t;
        if self.f.dim == 1 {
            [m[(0, 0)] * xi[0], 0.0]
        } else {
            [m[(0, 0)] * xi[0] + m[(0, 1)] * xi[1], m[(1, 0)] * xi[0] + m[(1, 1)] * xi[1]]
        }
    }
}

impl PointAmplitude for TransformedSymbol {
    fn dim(&self) -> usize {
        self.f.dim
    }
    fn order(&self) -> f64 {
        self.p.order()
    }
    fn hoelder(&self) -> f64 {
        self.p.hoelder().min(self.f.hoelder)
    }
    fn name(&self) -> String {
        format!("transformed[{} by {}]", self.p.name(), self.f.name)
    }
    fn value(&self, x: &[f64], y: &[f64], xi: &[f64]) -> Complex64 {
        let pair = self.pair(x, y);
        if pair.factor == 0.0 {
            return ZERO;
        }
        let eta = self.frequency(&pair, xi);
        let d = self.f.dim;
        self.p.value(&pair.fx[..d], &eta[..d]) * pair.factor
    }
    fn xi_jet(&self, x: &[f64], y: &[f64], xi: &[f64]) -> Option<Jet> {
        let pair = self.pair(x, y);
        if pair.factor == 0.0 {
            return Some(Jet::constant(ZERO));
        }
        let eta = self.frequency(&pair, xi);
        let d = self.f.dim;
        let j = self.p.jet(&pair.fx[..d], &eta[..d])?;
        Some(substitute_linear(&j, &pair.a_inv_t, d).scale(Complex64::new(pair.factor, 0.0)))
    }
    fn values(&self, x: &[f64], y: &[f64], freqs: &[Vec<f64>], out: &mut [Complex64]) {
        let pair = self.pair(x, y);
        let d = self.f.dim;
        for (o, xi) in out.iter_mut().zip(freqs) {
            *o = if pair.factor == 0.0 {
                ZERO
            } else {
                self.p.value(&pair.fx[..d], &self.frequency(&pair, xi)[..d]) * pair.factor
            };
        }
    }
}

/// Half the smallest `|F(x) - F(y)|` over sampled pairs whose averaged
/// Jacobian is flagged; infinite if none is.
pub fn auto_cutoff_radius(f: &Diffeomorphism, half_width: f64, per_dim: usize) -> f64 {
    let samples = box_samples(f.dim, half_width, per_dim);
    let d = f.dim;
    let images: Vec<Point> = samples.iter().map(|p| f.apply(&p[..d])).collect();
    let worst = exec::map_indexed(samples.len(), |i| {
        let mut best = f64::INFINITY;
        for j in 0..samples.len() {
            if averaged_jacobian(f, &samples[i][..d], &samples[j][..d]).flagged {
                let z = (0..d).map(|a| (images[i][a] - images[j][a]).powi(2)).sum::<f64>().sqrt();
                best = best.min(z);
            }
        }
        best
    });
    0.5 * worst.into_iter().fold(f64::INFINITY, f64::min)
}

/// Transformed amplitude of `p` under `f`, cut off at radius `delta`
/// (`None`: chosen by [`auto_cutoff_radius`] on the default sample box).
pub fn transform_symbol(p: Arc<dyn Symbol>, f: &Diffeomorphism, delta: Option<f64>) -> Result<Arc<TransformedSymbol>> {
    if Symbol::dim(&p) != f.dim {
        return Err(Error::Argument("symbol and map dimensions differ".into()));
    }
    if !(f.det_bounds.0 > 0.0) {
        return Err(Error::Geometry(format!("'{}' violates the determinant bounds", f.name)));
    }
    let per_dim = if f.dim == 1 { 129 } else { 17 };
    let delta = match delta {
        Some(d) if d > 0.0 => {
            // A must stay invertible wherever the cutoff is active
            let safe = auto_cutoff_radius(f, SAMPLE_BOX, per_dim);
            if d > 2.0 * safe {
                return Err(Error::Geometry(format!(
                    "averaged Jacobian is singular inside the cutoff: δ = {d} exceeds {:.4}",
                    2.0 * safe
                )));
            }
            d
        }
        Some(d) => return Err(Error::Argument(format!("cutoff radius must be positive, got {d}"))),
        None => auto_cutoff_radius(f, SAMPLE_BOX, per_dim),
    };
    Ok(Arc::new(TransformedSymbol {
        p,
        f: f.clone(),
        delta,
    }))
}

/// [`XFormExpansion`] of a transformed symbol with the principal term
/// compared against the original symbol.
pub struct TransformedExpansion {
    pub expansion: XFormExpansion,
    /// `|q₀ - p|` in the order-0 seminorm with `C^{τ'}` in x, measured on
    /// the grid.
    pub principal_distance: f64,
    pub tau_prime: f64,
}

/// Expands `q` to x-form up to order `l` (which must stay below τ).
pub fn expand_transformed(q: Arc<TransformedSymbol>, grid: TorusGrid, l: usize, tau_prime: f64) -> Result<TransformedExpansion> {
    let expansion = reduce_to_x_form(q.clone() as Arc<dyn Amplitude>, grid, l)?;
    let principal_distance = principal_distance_on_grid(&expansion, q.p.as_ref(), tau_prime)?;
    Ok(TransformedExpansion {
        expansion,
        principal_distance,
        tau_prime,
    })
}

fn principal_distance_on_grid(e: &XFormExpansion, p: &dyn Symbol, tau_prime: f64) -> Result<f64> {
    let grid = e.grid;
    let ctx = GridCtx::new(grid);
    let q0 = e.principal();
    let m = p.order();
    let per_freq = exec::map_indexed(grid.len(), |k| {
        let xi = &ctx.freqs[k];
        let diff: Vec<Complex64> = (0..grid.len()).map(|i| q0.get(i, k) - p.value(&ctx.nodes[i], xi)).collect();
        let norm = ctau_norm_points(&ctx.nodes, tau_prime, 1.0, |i, _| diff[i]);
        bracket(xi).powf(-m) * norm
    });
    Ok(per_freq.into_iter().fold(0.0, f64::max))
}

/// `|q₀ - p|` from the closed form `q₀(x,ξ) = p(F(x), ∇F(x)^{-T}ξ)`: the
/// largest `⟨ξ⟩^{|α|-m} ‖∂_ξ^α(q₀ - p)(·,ξ)‖_{C^{τ'}}` over `|α| <= k`,
/// sample points `xs` and frequencies `xis`.
pub fn principal_distance(
    p: &dyn Symbol,
    f: &Diffeomorphism,
    k: usize,
    tau_prime: f64,
    xs: &[Vec<f64>],
    xis: &[Vec<f64>],
) -> Result<f64> {
    let d = f.dim;
    let m = p.order();
    let mut best: f64 = 0.0;
    for alpha in crate::multi::up_to(d, k) {
        let ord = crate::multi::order(&alpha);
        for xi in xis {
            let mut diff = Vec::with_capacity(xs.len());
            for x in xs {
                let q0 = {
                    let jac_t_inv = f
                        .jacobian(x)
                        .try_inverse()
                        .ok_or_else(|| Error::Geometry("singular Jacobian".into()))?
                        .transpose();
                    let fx = f.apply(x);
                    let eta: Vec<f64> = (0..d)
                        .map(|a| (0..d).map(|b| jac_t_inv[(a, b)] * xi[b]).sum())
                        .collect();
                    if ord == 0 {
                        p.value(&fx[..d], &eta)
                    } else {
                        let j = p
                            .jet(&fx[..d], &eta)
                            .ok_or_else(|| Error::Capability(format!("symbol '{}' has no ξ-jets", p.name())))?;
                        substitute_linear(&j, &jac_t_inv, d).derivative_multi(&alpha)
                    }
                };
                let p0 = if ord == 0 {
                    p.value(x, xi)
                } else {
                    p.jet(x, xi)
                        .ok_or_else(|| Error::Capability(format!("symbol '{}' has no ξ-jets", p.name())))?
                        .derivative_multi(&alpha)
                };
                diff.push(q0 - p0);
            }
            let norm = ctau_norm_points(xs, tau_prime, 1.0, |i, _| diff[i]);
            best = best.max(bracket(xi).powf(ord as f64 - m) * norm);
        }
    }
    Ok(best)
}

/// `max |q(x,y,-ξ) - (±)q(x,y,ξ)| / max |q|` over the sampled triples.
pub fn transformed_parity_residual(q: &TransformedSymbol, kind: Parity, xs: &[Vec<f64>], ys: &[Vec<f64>], xis: &[Vec<f64>]) -> f64 {
    let sign = match kind {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for x in xs {
        for y in ys {
            for xi in xis {
                let minus: Vec<f64> = xi.iter().map(|v| -v).collect();
                let a = q.value(x, y, xi);
                let b = q.value(x, y, &minus);
                num = num.max((b - a * sign).norm());
                den = den.max(a.norm());
            }
        }
    }
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Direct pullback `(P(u∘F⁻¹))∘F` on the torus, with `u∘F⁻¹` sampled by
/// trigonometric interpolation and the result evaluated the same way.
/// `F` must commute with the lattice of periods.
pub fn pullback_apply(p: &dyn GridSymbol, f: &Diffeomorphism, u: &GridFunction) -> Result<GridFunction> {
    let grid = u.grid;
    let d = grid.dim;
    let cu = u.forward();
    let moved = exec::map_indexed(grid.len(), |i| {
        let y = grid.node(i);
        let x = f.apply_inverse(&y);
        GridFunction::trig_eval(&grid, &cu, &x[..d])
    });
    let v = apply_x_form(p, &GridFunction::new(grid, moved)?)?;
    let cv = v.forward();
    let back = exec::map_indexed(grid.len(), |i| {
        let x = grid.node(i);
        let fx = f.apply(&x);
        GridFunction::trig_eval(&grid, &cv, &fx[..d])
    });
    GridFunction::new(grid, back)
}

/// The far-field part discarded by the cutoff, applied operationally:
/// at each node, `P` acts on `(1 - ψ(F(x) - ·))·(u∘F⁻¹)` and the result is
/// read at `F(x)`. Zero when the cutoff is inactive.
pub fn far_field_apply(q: &TransformedSymbol, u: &GridFunction) -> Result<GridFunction> {
    let grid = u.grid;
    if !q.delta.is_finite() {
        return Ok(GridFunction::zeros(grid));
    }
    let d = grid.dim;
    let cu = u.forward();
    let nodes = grid.nodes();
    let moved: Vec<Complex64> = nodes
        .iter()
        .map(|y| {
            let x = q.f.apply_inverse(y);
            GridFunction::trig_eval(&grid, &cu, &x[..d])
        })
        .collect();
    let values: Vec<Result<Complex64>> = exec::map_indexed(grid.len(), |i| {
        let fx = q.f.apply(&nodes[i]);
        let masked: Vec<Complex64> = nodes
            .iter()
            .zip(&moved)
            .map(|(y, v)| {
                let z = (0..d).map(|a| grid.wrap(fx[a] - y[a]).powi(2)).sum::<f64>().sqrt();
                v * (1.0 - plateau(z, 0.5 * q.delta, q.delta))
            })
            .collect();
        let w = apply_x_form(&q.p, &GridFunction::new(grid, masked)?)?;
        Ok(GridFunction::trig_eval(&grid, &w.forward(), &fx[..d]))
    });
    GridFunction::new(grid, values.into_iter().collect::<Result<_>>()?)
}
