//! Expression trees for symbol terms.

use crate::jet::Scalar;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// A named function of the space variable.
#[derive(Clone)]
pub struct Coefficient {
    pub name: String,
    f: Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>,
}

impl Coefficient {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Coefficient {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn real(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::new(name, move |x| Complex64::new(f(x), 0.0))
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        (self.f)(x)
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Symbol expression in `(x, ξ)`. The last ξ-component is the normal one.
#[derive(Clone, Debug)]
pub enum Expr {
    Const(Complex64),
    /// `|ξ|^s`
    AbsPow(f64),
    /// `⟨ξ⟩^s = (1 + |ξ|²)^{s/2}`
    BracketPow(f64),
    /// `(⟨ξ'⟩ ± iξₙ)^t`, or `(|ξ'| ± iξₙ)^t` when `principal`.
    Chi { sign: Sign, t: f64, principal: bool },
    /// `ξ_k`
    Component(usize),
    Coefficient(Coefficient),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(Complex64::new(v, 0.0))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (Expr::Const(x), e) | (e, Expr::Const(x)) if x == Complex64::new(1.0, 0.0) => e,
            (Expr::Mul(mut xs), Expr::Mul(ys)) => {
                xs.extend(ys);
                Expr::Mul(xs)
            }
            (Expr::Mul(mut xs), e) => {
                xs.push(e);
                Expr::Mul(xs)
            }
            (e, Expr::Mul(mut ys)) => {
                ys.insert(0, e);
                Expr::Mul(ys)
            }
            (a, b) => Expr::Mul(vec![a, b]),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Add(mut xs), e) => {
                xs.push(e);
                Expr::Add(xs)
            }
            (a, b) => Expr::Add(vec![a, b]),
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Coefficient(_) => true,
            Expr::Mul(v) | Expr::Add(v) => v.iter().any(Expr::depends_on_x),
            _ => false,
        }
    }

    /// True when the expression involves `|ξ'|` through a principal χ factor,
    /// which is not differentiable in the tangential variables at `ξ' = 0`.
    pub fn has_principal_chi(&self) -> bool {
        match self {
            Expr::Chi { principal, .. } => *principal,
            Expr::Mul(v) | Expr::Add(v) => v.iter().any(Expr::has_principal_chi),
            _ => false,
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[f64], xi: &[S]) -> S {
        let n = xi.len();
        match self {
            Expr::Const(c) => S::from_complex(*c),
            Expr::AbsPow(s) => {
                if *s == 0.0 {
                    return S::from_real(1.0);
                }
                let r2 = sum_sq(xi);
                r2.powc(Complex64::new(0.5 * s, 0.0))
            }
            Expr::BracketPow(s) => {
                let r2 = sum_sq(xi) + S::from_real(1.0);
                r2.powc(Complex64::new(0.5 * s, 0.0))
            }
            Expr::Chi { sign, t, principal } => {
                if *t == 0.0 {
                    return S::from_real(1.0);
                }
                let tang = sum_sq(&xi[..n - 1]);
                let re = if *principal {
                    if n == 1 {
                        S::from_real(0.0)
                    } else {
                        tang.sqrt()
                    }
                } else {
                    (tang + S::from_real(1.0)).sqrt()
                };
                let base = re + xi[n - 1].scale(Complex64::new(0.0, sign.factor()));
                base.powc(Complex64::new(*t, 0.0))
            }
            Expr::Component(k) => xi[*k],
            Expr::Coefficient(c) => S::from_complex(c.eval(x)),
            Expr::Mul(v) => {
                let mut acc = v[0].eval(x, xi);
                for e in &v[1..] {
                    acc = acc * e.eval(x, xi);
                }
                acc
            }
            Expr::Add(v) => {
                let mut acc = v[0].eval(x, xi);
                for e in &v[1..] {
                    acc = acc + e.eval(x, xi);
                }
                acc
            }
        }
    }
}

fn sum_sq<S: Scalar>(xi: &[S]) -> S {
    let mut acc = S::from_real(0.0);
    for v in xi {
        acc = acc + *v * *v;
    }
    acc
}
