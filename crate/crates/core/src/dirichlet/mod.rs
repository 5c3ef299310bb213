//! The homogeneous Dirichlet problem `r⁺Pu = f`, `supp u ⊂ Ω̄`, discretized
//! by collocation of `r⁺ P e⁺` on the interior nodes of a torus grid.

mod oracle;
mod regularity;

pub use oracle::*;
pub use regularity::*;

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{DomainMask, GridFunction, TorusGrid};
use crate::quantize::apply_x_form;
use crate::symbols::{check_parity, check_strong_ellipticity, ClassicalSymbol, Parity, Symbol, SymbolSample};
use nalgebra::{DMatrix, DVector, LU};
use num_complex::Complex64;
use serde::Serialize;
use std::sync::OnceLock;

/// Default memory cap for the dense matrix: a 4000-node complex matrix.
pub const DEFAULT_MAX_MATRIX_BYTES: f64 = 4000.0 * 4000.0 * 16.0;
/// Largest torus size per axis accepted in 1D.
pub const MAX_N_1D: usize = 4096;
/// Largest interior node count accepted in 2D.
pub const MAX_INTERIOR_2D: usize = 4000;
/// Singular-value ratio below which a system counts as near-singular.
pub const NEAR_KERNEL_RATIO: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct AssembleOptions {
    /// Add the periodic-image correction when `p = c(x)|ξ|^{2a}`.
    pub image_correction: bool,
    pub max_matrix_bytes: f64,
    /// Compute the Hermitian-part eigenvalues (the positivity margin).
    pub margin: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            image_correction: true,
            max_matrix_bytes: DEFAULT_MAX_MATRIX_BYTES,
            margin: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyMethod {
    /// One impulse response shifted to every column (x-independent symbols).
    ShiftedImpulse,
    /// One inverse transform per interior row (x-dependent symbols).
    RowKernels,
}

/// The collocation matrix, stored real when every imaginary part is
/// round-off.
#[derive(Clone, Debug)]
pub enum SystemMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl SystemMatrix {
    pub fn size(&self) -> usize {
        match self {
            SystemMatrix::Real(m) => m.nrows(),
            SystemMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            SystemMatrix::Real(m) => Complex64::new(m[(i, j)], 0.0),
            SystemMatrix::Complex(m) => m[(i, j)],
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, SystemMatrix::Real(_))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        exec::map_indexed(n, |i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, x) in v.iter().enumerate() {
                acc += self.get(i, j) * x;
            }
            acc
        })
    }

    /// Eigenvalues of `(A + A*)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = match self {
            SystemMatrix::Real(m) => {
                let h = (m + m.transpose()) * 0.5;
                h.symmetric_eigenvalues().iter().copied().collect()
            }
            SystemMatrix::Complex(m) => {
                let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
                h.symmetric_eigenvalues().iter().copied().collect()
            }
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Extreme singular values.
    pub fn singular_range(&self) -> (f64, f64) {
        let sv: Vec<f64> = match self {
            SystemMatrix::Real(m) => m.singular_values().iter().copied().collect(),
            SystemMatrix::Complex(m) => m.singular_values().iter().copied().collect(),
        };
        let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sv.iter().copied().fold(0.0, f64::max);
        (lo, hi)
    }
}

enum Factor {
    Real(LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Complex(LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// Assembled Dirichlet system on the interior nodes of a domain mask.
pub struct DirichletSystem {
    pub symbol: ClassicalSymbol,
    /// Half the order: the boundary exponent of solutions.
    pub a: f64,
    pub domain: DomainMask,
    pub grid: TorusGrid,
    pub matrix: SystemMatrix,
    pub method: AssemblyMethod,
    /// Whether the periodic-image correction was added.
    pub image_correction: bool,
    /// Smallest and largest eigenvalue of the Hermitian part, if computed.
    pub hermitian_range: Option<(f64, f64)>,
    factor: OnceLock<std::result::Result<Factor, Error>>,
}

impl std::fmt::Debug for DirichletSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirichletSystem")
            .field("symbol", &self.symbol.name)
            .field("grid", &self.grid)
            .field("size", &self.matrix.size())
            .field("method", &self.method)
            .field("image_correction", &self.image_correction)
            .field("hermitian_range", &self.hermitian_range)
            .finish()
    }
}

/// Checks the solver hypotheses on `p`: even, strongly elliptic, `τ > 2a`.
pub fn check_hypotheses(p: &ClassicalSymbol, mask: &DomainMask) -> Result<()> {
    if !(p.order >= 0.0 && p.order < 2.0) {
        return Err(Error::Hypothesis(format!("order 2a = {} must lie in [0, 2)", p.order)));
    }
    if p.order > 0.0 && !(p.hoelder > p.order) {
        return Err(Error::Hypothesis(format!(
            "Hölder exponent τ = {} must exceed the order 2a = {}",
            p.hoelder, p.order
        )));
    }
    let stride = (mask.count() / 16).max(1);
    let xs: Vec<Vec<f64>> = mask.interior().iter().step_by(stride).map(|&i| mask.grid.node(i)).collect();
    if xs.is_empty() {
        return Err(Error::Argument("domain has no interior nodes".into()));
    }
    let sphere = SymbolSample::sphere(p.dim, 16, 7);
    let xis = SymbolSample::shells(p.dim, &[1.0, 3.0, 10.0], 8, 11);
    let parity = check_parity(p, Parity::Even, &SymbolSample { xs: xs.clone(), xis }, 1e-10);
    if !parity.pass {
        return Err(Error::Hypothesis(format!(
            "symbol is not even (relative parity residual {:.3e})",
            parity.max_relative
        )));
    }
    let margin = check_strong_ellipticity(p, &sphere, &xs)?;
    if !(margin > 0.0) {
        return Err(Error::Hypothesis(format!("symbol is not strongly elliptic (margin {margin:.3e})")));
    }
    Ok(())
}

/// Node index at offset `(Δ₀, Δ₁)` cells from the center node `x = 0`.
fn centered(grid: &TorusGrid, d: [i64; 2]) -> usize {
    let n = grid.n as i64;
    let c = n / 2;
    let m0 = (c + d[0]).rem_euclid(n) as usize;
    if grid.dim == 1 {
        m0
    } else {
        m0 * grid.n + (c + d[1]).rem_euclid(n) as usize
    }
}

fn cell_offset(grid: &TorusGrid, i: usize, j: usize) -> [i64; 2] {
    let (mi, mj) = (grid.unflatten(i), grid.unflatten(j));
    [mi[0] as i64 - mj[0] as i64, mi[1] as i64 - mj[1] as i64]
}

/// `c(x)` with `p(x, ξ) = c(x)|ξ|^{2a}` at the given node, if `p` has that
/// form at the sampled frequencies.
fn laplacian_coefficient(p: &ClassicalSymbol, x: &[f64], grid: &TorusGrid) -> Option<f64> {
    let a = 0.5 * p.order;
    let kmax = (grid.n / 2 - 1) as f64;
    let probes = [1.0, 0.5 * kmax, kmax];
    let mut c0 = None;
    for &k in &probes {
        let mut xi = vec![0.0; p.dim];
        xi[0] = 2.0 * std::f64::consts::PI * k / grid.length;
        let r = xi[0].abs();
        let v = p.value(x, &xi) / r.powf(2.0 * a);
        if v.im.abs() > 1e-12 * v.re.abs() {
            return None;
        }
        match c0 {
            None => c0 = Some(v.re),
            Some(c) if (v.re - c).abs() <= 1e-12 * c.abs() => {}
            Some(_) => return None,
        }
    }
    c0
}

/// Assembles `r⁺ P e⁺` on the interior nodes. Column `j` is the interior
/// restriction of `apply_x_form(p, δ_j)`.
pub fn assemble(p: &ClassicalSymbol, mask: &DomainMask, opts: &AssembleOptions) -> Result<DirichletSystem> {
    let grid = mask.grid;
    if Symbol::dim(p) != grid.dim {
        return Err(Error::GridMismatch("symbol and grid dimensions differ".into()));
    }
    if grid.n % 2 != 0 {
        return Err(Error::Argument("the Dirichlet solver needs an even number of points per axis".into()));
    }
    let m = mask.count();
    if grid.dim == 1 && grid.n > MAX_N_1D {
        return Err(Error::Argument(format!("1D grids are capped at N = {MAX_N_1D}")));
    }
    if grid.dim == 2 && m > MAX_INTERIOR_2D {
        return Err(Error::Argument(format!(
            "{m} interior nodes exceed the 2D cap of {MAX_INTERIOR_2D}"
        )));
    }
    let bytes = (m as f64).powi(2) * 16.0;
    if bytes > opts.max_matrix_bytes {
        return Err(Error::Budget {
            required: bytes,
            budget: opts.max_matrix_bytes,
        });
    }
    check_hypotheses(p, mask)?;
    let interior = mask.interior().to_vec();
    let a = 0.5 * p.order;

    // kernel rows: kernel(r)[centered(Δ)] = (P δ_j)(x_i) with Δ = i - j
    let (method, kernels): (AssemblyMethod, Vec<GridFunction>) = if p.depends_on_x() {
        let nn = grid.len() as f64;
        let rows = exec::map_indexed(m, |r| -> Result<GridFunction> {
            let x = grid.node(interior[r]);
            let coeffs: Vec<Complex64> = (0..grid.len()).map(|k| p.value(&x, &grid.freq(k)) / nn).collect();
            GridFunction::inverse(grid, &coeffs)
        });
        (AssemblyMethod::RowKernels, rows.into_iter().collect::<Result<_>>()?)
    } else {
        let mut delta = GridFunction::zeros(grid);
        delta.values[centered(&grid, [0, 0])] = Complex64::new(1.0, 0.0);
        (AssemblyMethod::ShiftedImpulse, vec![apply_x_form(p, &delta)?])
    };

    let coefficients: Option<Vec<f64>> = if opts.image_correction && a > 0.0 && a < 1.0 {
        let rows = if p.depends_on_x() { m } else { 1 };
        (0..rows)
            .map(|r| laplacian_coefficient(p, &grid.node(interior[r]), &grid))
            .collect()
    } else {
        None
    };
    let images = coefficients.as_ref().map(|_| {
        // image sums for every cell offset between interior nodes
        let h = grid.spacing();
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        for &i in &interior {
            let u = grid.unflatten(i);
            for ax in 0..2 {
                lo[ax] = lo[ax].min(u[ax] as i64);
                hi[ax] = hi[ax].max(u[ax] as i64);
            }
        }
        let span = [hi[0] - lo[0], if grid.dim == 2 { hi[1] - lo[1] } else { 0 }];
        let width = (2 * span[1] + 1) as usize;
        let sum = ImageSum::new(grid.dim, a, grid.length);
        let scale = frac_laplacian_constant(grid.dim, a) * h.powi(grid.dim as i32);
        let table = exec::map_indexed((2 * span[0] + 1) as usize * width, |t| {
            let d0 = (t / width) as i64 - span[0];
            let d1 = (t % width) as i64 - span[1];
            scale * sum.eval(&[d0 as f64 * h, d1 as f64 * h])
        });
        (span, width, table)
    });

    let kernel_at = |r: usize, c: usize| -> Complex64 {
        let d = cell_offset(&grid, interior[r], interior[c]);
        let k = if kernels.len() == 1 { &kernels[0] } else { &kernels[r] };
        let mut v = k.values[centered(&grid, d)];
        if let (Some(coef), Some((span, width, table))) = (&coefficients, &images) {
            let cr = if coef.len() == 1 { coef[0] } else { coef[r] };
            let t = (d[0] + span[0]) as usize * width + (d[1] + span[1]) as usize;
            v += cr * table[t];
        }
        v
    };
    let mut data = vec![Complex64::new(0.0, 0.0); m * m];
    // column-major: chunk c is column c
    exec::for_each_chunk(&mut data, m.max(1), |c, col| {
        for (r, slot) in col.iter_mut().enumerate() {
            *slot = kernel_at(r, c);
        }
    });
    let scale = data.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let imag = data.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let matrix = if imag <= 1e-12 * scale {
        SystemMatrix::Real(DMatrix::from_vec(m, m, data.iter().map(|v| v.re).collect()))
    } else {
        SystemMatrix::Complex(DMatrix::from_vec(m, m, data))
    };
    let hermitian_range = if opts.margin && m > 0 {
        let ev = matrix.hermitian_eigenvalues();
        Some((ev[0], ev[ev.len() - 1]))
    } else {
        None
    };
    Ok(DirichletSystem {
        symbol: p.clone(),
        a,
        domain: mask.clone(),
        grid,
        matrix,
        method,
        image_correction: coefficients.is_some(),
        hermitian_range,
        factor: OnceLock::new(),
    })
}

#[derive(Clone, Debug)]
pub struct DirichletSolution {
    /// Solution, zero outside the domain.
    pub u: GridFunction,
    /// `‖Au - f‖∞ / ‖f‖∞` on the interior nodes.
    pub residual: f64,
}

impl DirichletSystem {
    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    /// Positivity margin of the Hermitian part relative to its largest
    /// eigenvalue.
    pub fn relative_margin(&self) -> Option<f64> {
        self.hermitian_range.map(|(lo, hi)| lo / hi.abs().max(f64::MIN_POSITIVE))
    }

    /// `‖A‖/λ_min(Re A)`, an upper bound on the condition number when the
    /// Hermitian part is positive.
    pub fn condition_bound(&self) -> Option<f64> {
        match self.hermitian_range {
            Some((lo, _)) if lo > 0.0 => {
                let norm = match &self.matrix {
                    SystemMatrix::Real(m) => m.norm(),
                    SystemMatrix::Complex(m) => m.norm(),
                };
                Some(norm / lo)
            }
            _ => None,
        }
    }

    fn factor(&self) -> Result<&Factor> {
        self.factor
            .get_or_init(|| {
                // a positive Hermitian part bounds σ_min from below;
                // otherwise measure the singular values
                let certified = matches!(self.relative_margin(), Some(r) if r > NEAR_KERNEL_RATIO);
                if !certified {
                    let (lo, hi) = self.matrix.singular_range();
                    let ratio = lo / hi.max(f64::MIN_POSITIVE);
                    if !(ratio >= NEAR_KERNEL_RATIO) {
                        return Err(Error::NearKernel { ratio });
                    }
                }
                Ok(match &self.matrix {
                    SystemMatrix::Real(m) => Factor::Real(m.clone().lu()),
                    SystemMatrix::Complex(m) => Factor::Complex(m.clone().lu()),
                })
            })
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// Solves `A v = b` on interior values.
    pub fn solve_interior(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if b.len() != self.size() {
            return Err(Error::GridMismatch(format!("{} values for {} unknowns", b.len(), self.size())));
        }
        let singular = || Error::NearKernel { ratio: 0.0 };
        Ok(match self.factor()? {
            Factor::Real(lu) => {
                let re = lu
                    .solve(&DVector::from_iterator(b.len(), b.iter().map(|v| v.re)))
                    .ok_or_else(singular)?;
                let im = lu
                    .solve(&DVector::from_iterator(b.len(), b.iter().map(|v| v.im)))
                    .ok_or_else(singular)?;
                re.iter().zip(im.iter()).map(|(r, i)| Complex64::new(*r, *i)).collect()
            }
            Factor::Complex(lu) => lu
                .solve(&DVector::from_column_slice(b))
                .ok_or_else(singular)?
                .iter()
                .copied()
                .collect(),
        })
    }

    /// `A v` on interior values.
    pub fn apply_interior(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix.mul_vec(v)
    }

    /// `r⁺ P e⁺ u` as a grid function (zero outside the domain).
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        let v = self.domain.compress(u)?;
        self.domain.extend_by_zero(&self.apply_interior(&v))
    }

    /// `‖A v - b‖∞ / ‖b‖∞`.
    pub fn residual(&self, v: &[Complex64], b: &[Complex64]) -> f64 {
        let av = self.apply_interior(v);
        let num = av.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let den = b.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

/// Solves `r⁺Pu = f` with `u` supported in the domain.
pub fn solve(system: &DirichletSystem, f: &GridFunction) -> Result<DirichletSolution> {
    let b = system.domain.compress(f)?;
    let v = system.solve_interior(&b)?;
    let residual = system.residual(&v, &b);
    Ok(DirichletSolution {
        u: system.domain.extend_by_zero(&v)?,
        residual,
    })
}
