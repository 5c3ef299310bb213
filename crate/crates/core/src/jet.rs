//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients of a complex function of at most
//! two real variables up to total degree [`MAX_DEGREE`]. Evaluating a symbol
//! expression on jets seeded at `ξ0` yields all ξ-derivatives up to that
//! order at once, exactly up to round-off.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use std::ops::{Add, Mul, Neg, Sub};

pub const MAX_DEGREE: usize = 4;
pub const NVARS: usize = 2;
/// Number of monomials `x^i y^j` with `i + j <= MAX_DEGREE`.
pub const NCOEF: usize = (MAX_DEGREE + 1) * (MAX_DEGREE + 2) / 2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

struct Tables {
    index: [[usize; MAX_DEGREE + 1]; MAX_DEGREE + 1],
    mono: [(usize, usize); NCOEF],
    products: Vec<(usize, usize, usize)>,
}

static TABLES: Lazy<Tables> = Lazy::new(|| {
    let mut index = [[usize::MAX; MAX_DEGREE + 1]; MAX_DEGREE + 1];
    let mut mono = [(0, 0); NCOEF];
    let mut k = 0;
    for d in 0..=MAX_DEGREE {
        for j in 0..=d {
            let i = d - j;
            index[i][j] = k;
            mono[k] = (i, j);
            k += 1;
        }
    }
    let mut products = Vec::new();
    for a in 0..NCOEF {
        for b in 0..NCOEF {
            let (i1, j1) = mono[a];
            let (i2, j2) = mono[b];
            if i1 + i2 + j1 + j2 <= MAX_DEGREE {
                products.push((a, b, index[i1 + i2][j1 + j2]));
            }
        }
    }
    Tables {
        index,
        mono,
        products,
    }
});

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub c: [Complex64; NCOEF],
}

impl Jet {
    pub fn constant(v: Complex64) -> Self {
        let mut c = [ZERO; NCOEF];
        c[0] = v;
        Jet { c }
    }

    /// The independent variable `k` seeded at `value`.
    pub fn variable(k: usize, value: f64) -> Self {
        assert!(k < NVARS);
        let mut j = Jet::constant(Complex64::new(value, 0.0));
        let idx = if k == 0 { TABLES.index[1][0] } else { TABLES.index[0][1] };
        j.c[idx] = Complex64::new(1.0, 0.0);
        j
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    /// Coefficient of `x^i y^j`.
    pub fn coef(&self, i: usize, j: usize) -> Complex64 {
        if i + j > MAX_DEGREE {
            return ZERO;
        }
        self.c[TABLES.index[i][j]]
    }

    pub fn set_coef(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(i + j <= MAX_DEGREE);
        self.c[TABLES.index[i][j]] = v;
    }

    /// Partial derivative `∂x^i ∂y^j` at the seed point.
    pub fn derivative(&self, i: usize, j: usize) -> Complex64 {
        self.coef(i, j) * (factorial(i) * factorial(j))
    }

    /// Derivative for a multi-index given as a slice of length 1 or 2.
    pub fn derivative_multi(&self, alpha: &[usize]) -> Complex64 {
        match alpha.len() {
            0 => self.value(),
            1 => self.derivative(alpha[0], 0),
            2 => self.derivative(alpha[0], alpha[1]),
            _ => panic!("jets support at most two variables"),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        for v in out.c.iter_mut() {
            *v *= s;
        }
        out
    }

    /// `f(self)` from the derivatives `f^(k)(self.value())`, k = 0..=MAX_DEGREE.
    pub fn compose(&self, derivs: &[Complex64; MAX_DEGREE + 1]) -> Self {
        let mut delta = *self;
        delta.c[0] = ZERO;
        let mut out = Jet::constant(derivs[0]);
        let mut power = Jet::constant(Complex64::new(1.0, 0.0));
        for (k, dk) in derivs.iter().enumerate().skip(1) {
            power = power * delta;
            let w = *dk / factorial(k);
            for (o, p) in out.c.iter_mut().zip(power.c.iter()) {
                // skipping exact zeros keeps infinite derivatives of a
                // constant argument from poisoning the result
                if *p != ZERO {
                    *o += w * p;
                }
            }
        }
        out
    }

    pub fn monomial_exponents(k: usize) -> (usize, usize) {
        TABLES.mono[k]
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for a in self.c.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut c = [ZERO; NCOEF];
        for &(a, b, t) in TABLES.products.iter() {
            c[t] += self.c[a] * rhs.c[b];
        }
        Jet { c }
    }
}

/// Principal-branch power `z^t`, with `0^t = 0` for `Re t > 0`.
pub fn powc_principal(z: Complex64, t: Complex64) -> Complex64 {
    if z == ZERO {
        if t == ZERO {
            return Complex64::new(1.0, 0.0);
        }
        if t.re > 0.0 {
            return ZERO;
        }
        return Complex64::new(f64::INFINITY, 0.0);
    }
    if t.im == 0.0 && z.im == 0.0 && z.re > 0.0 {
        return Complex64::new(z.re.powf(t.re), 0.0);
    }
    (t * z.ln()).exp()
}

/// Arithmetic shared by plain complex numbers and jets, so that symbol
/// expressions are written once and evaluated either way.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_complex(v: Complex64) -> Self;
    fn value(&self) -> Complex64;
    fn scale(&self, s: Complex64) -> Self;
    fn powc(&self, t: Complex64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn recip(&self) -> Self;

    fn from_real(v: f64) -> Self {
        Self::from_complex(Complex64::new(v, 0.0))
    }
    fn sqrt(&self) -> Self {
        self.powc(Complex64::new(0.5, 0.0))
    }
}

impl Scalar for Complex64 {
    fn from_complex(v: Complex64) -> Self {
        v
    }
    fn value(&self) -> Complex64 {
        *self
    }
    fn scale(&self, s: Complex64) -> Self {
        self * s
    }
    fn powc(&self, t: Complex64) -> Self {
        powc_principal(*self, t)
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
    fn recip(&self) -> Self {
        Complex64::new(1.0, 0.0) / self
    }
}

impl Scalar for Jet {
    fn from_complex(v: Complex64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> Complex64 {
        self.c[0]
    }
    fn scale(&self, s: Complex64) -> Self {
        Jet::scale(self, s)
    }
    fn powc(&self, t: Complex64) -> Self {
        let z = self.c[0];
        let mut d = [ZERO; MAX_DEGREE + 1];
        let mut falling = Complex64::new(1.0, 0.0);
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = falling * powc_principal(z, t - k as f64);
            falling *= t - k as f64;
        }
        if t.im == 0.0 && t.re.fract() == 0.0 && t.re >= 0.0 {
            // nonnegative integer power: lower-order terms are exact even at z = 0
            for (k, dk) in d.iter_mut().enumerate() {
                if (t.re as i64) < k as i64 {
                    *dk = ZERO;
                }
            }
        }
        self.compose(&d)
    }
    fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.compose(&[e; MAX_DEGREE + 1])
    }
    fn ln(&self) -> Self {
        let z = self.c[0];
        let r = Complex64::new(1.0, 0.0) / z;
        self.compose(&[z.ln(), r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }
    fn recip(&self) -> Self {
        let z = self.c[0];
        let r = Complex64::new(1.0, 0.0) / z;
        self.compose(&[r, -r * r, 2.0 * r * r * r, -6.0 * r.powi(4), 24.0 * r.powi(5)])
    }
}
