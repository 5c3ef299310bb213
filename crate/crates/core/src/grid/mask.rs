use super::{GridFunction, TorusGrid};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// The domains the solvers understand.
#[derive(Clone)]
pub enum DomainKind {
    /// `(a, b)` in 1D.
    Interval { a: f64, b: f64 },
    /// `{xₙ > 0}`.
    Halfspace,
    /// `{xₙ > γ(x')}`; distance is the vertical one, `xₙ - γ(x')`.
    Graph { name: String, gamma: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> },
    /// `{x₁²/a₁² + x₂²/a₂² < 1}` with exact Euclidean distance.
    Ellipse { a1: f64, a2: f64 },
}

impl fmt::Debug for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Interval { a, b } => write!(f, "Interval({a}, {b})"),
            DomainKind::Halfspace => write!(f, "Halfspace"),
            DomainKind::Graph { name, .. } => write!(f, "Graph({name})"),
            DomainKind::Ellipse { a1, a2 } => write!(f, "Ellipse({a1}, {a2})"),
        }
    }
}

/// Robust distance from `(y0, y1)` (first quadrant) to the ellipse with
/// semi-axes `e0 >= e1`, by bisection on the Lagrange parameter.
fn ellipse_distance_quadrant(e0: f64, e1: f64, y0: f64, y1: f64) -> f64 {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1).powi(2);
            let n0 = r0 * z0;
            let mut s0 = z1 - 1.0;
            let mut s1 = if g < 0.0 { 0.0 } else { (n0 * n0 + z1 * z1).sqrt() - 1.0 };
            let mut s = 0.0;
            for _ in 0..1100 {
                s = 0.5 * (s0 + s1);
                if s == s0 || s == s1 {
                    break;
                }
                let ratio0 = n0 / (s + r0);
                let ratio1 = z1 / (s + 1.0);
                let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
                if gs > 0.0 {
                    s0 = s;
                } else if gs < 0.0 {
                    s1 = s;
                } else {
                    break;
                }
            }
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            ((x0 - y0).powi(2) + (x1 - y1).powi(2)).sqrt()
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
            ((x0 - y0).powi(2) + x1 * x1).sqrt()
        } else {
            (y0 - e0).abs()
        }
    }
}

/// Euclidean distance from `x` to the ellipse `x₁²/a₁² + x₂²/a₂² = 1`.
pub fn ellipse_distance(a1: f64, a2: f64, x: &[f64]) -> f64 {
    let (y0, y1) = (x[0].abs(), x[1].abs());
    if a1 >= a2 {
        ellipse_distance_quadrant(a1, a2, y0, y1)
    } else {
        ellipse_distance_quadrant(a2, a1, y1, y0)
    }
}

impl DomainKind {
    /// Signed distance surrogate: positive inside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            DomainKind::Interval { a, b } => (x[0] - a).min(b - x[0]),
            DomainKind::Halfspace => x[x.len() - 1],
            DomainKind::Graph { gamma, .. } => {
                let n = x.len();
                x[n - 1] - gamma(&x[..n - 1])
            }
            DomainKind::Ellipse { a1, a2 } => {
                let d = ellipse_distance(*a1, *a2, x);
                if (x[0] / a1).powi(2) + (x[1] / a2).powi(2) < 1.0 {
                    d
                } else {
                    -d
                }
            }
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            DomainKind::Interval { .. } => Some(1),
            DomainKind::Ellipse { .. } => Some(2),
            _ => None,
        }
    }
}

/// Indicator of a domain on the nodes of a grid, with distances.
#[derive(Clone, Debug)]
pub struct DomainMask {
    pub grid: TorusGrid,
    pub kind: DomainKind,
    pub inside: Vec<bool>,
    /// Signed distance to the boundary at every node (positive inside).
    pub dist: Vec<f64>,
    interior: Vec<usize>,
}

impl DomainMask {
    pub fn new(grid: TorusGrid, kind: DomainKind) -> Result<Self> {
        if let Some(d) = kind.dim() {
            if d != grid.dim {
                return Err(Error::Argument(format!("{kind:?} needs a {d}-dimensional grid")));
            }
        }
        let dist: Vec<f64> = (0..grid.len()).map(|i| kind.signed_distance(&grid.node(i))).collect();
        let inside: Vec<bool> = dist.iter().map(|&d| d > 0.0).collect();
        let interior = (0..grid.len()).filter(|&i| inside[i]).collect();
        Ok(DomainMask {
            grid,
            kind,
            inside,
            dist,
            interior,
        })
    }

    pub fn full(grid: TorusGrid) -> Self {
        DomainMask {
            grid,
            kind: DomainKind::Halfspace,
            inside: vec![true; grid.len()],
            dist: vec![f64::INFINITY; grid.len()],
            interior: (0..grid.len()).collect(),
        }
    }

    /// Flat indices of the nodes inside the domain, increasing.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn count(&self) -> usize {
        self.interior.len()
    }

    /// `u` with the values outside the domain set to zero.
    pub fn restrict(&self, u: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&u.grid)?;
        Ok(GridFunction {
            grid: u.grid,
            values: u
                .values
                .iter()
                .zip(&self.inside)
                .map(|(&v, &ins)| if ins { v } else { Complex64::new(0.0, 0.0) })
                .collect(),
        })
    }

    /// Interior values of `u`, in the order of [`interior`](Self::interior).
    pub fn compress(&self, u: &GridFunction) -> Result<Vec<Complex64>> {
        self.grid.check_same(&u.grid)?;
        Ok(self.interior.iter().map(|&i| u.values[i]).collect())
    }

    /// Extension by zero of interior values.
    pub fn extend_by_zero(&self, v: &[Complex64]) -> Result<GridFunction> {
        if v.len() != self.interior.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} interior nodes",
                v.len(),
                self.interior.len()
            )));
        }
        let mut u = GridFunction::zeros(self.grid);
        for (&i, &x) in self.interior.iter().zip(v) {
            u.values[i] = x;
        }
        Ok(u)
    }
}
