//! Cubic splines in moment form (clamped, natural or periodic).

use super::Derivatives;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CubicSpline {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    /// Second derivatives at the knots.
    pub moments: Vec<f64>,
    pub periodic: bool,
}

/// Thomas algorithm: `a` sub-, `b` main, `c` super-diagonal.
fn tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = if i + 1 < n { c[i] / m } else { 0.0 };
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal system via Sherman–Morrison. `a[0]` couples row 0 to
/// the last unknown, `c[n-1]` the last row to the first.
fn cyclic(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let gamma = -b[0];
    let alpha = c[n - 1];
    let beta = a[0];
    let mut bb = b.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= alpha * beta / gamma;
    let x = tridiagonal(a, &bb, c, d);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = tridiagonal(a, &bb, c, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn check_knots(knots: &[f64], values: &[f64], min: usize) -> Result<()> {
    if knots.len() != values.len() || knots.len() < min {
        return Err(Error::Argument(format!("spline needs at least {min} matching knots and values")));
    }
    if knots.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Argument("spline knots must increase strictly".into()));
    }
    Ok(())
}

impl CubicSpline {
    /// Clamped spline with end slopes `d0`, `dn`.
    pub fn clamped(knots: Vec<f64>, values: Vec<f64>, d0: f64, dn: f64) -> Result<Self> {
        check_knots(&knots, &values, 2)?;
        let n = knots.len();
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (values[i + 1] - values[i]) / h[i]).collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        b[0] = 2.0 * h[0];
        c[0] = h[0];
        d[0] = 6.0 * (slope[0] - d0);
        for i in 1..n - 1 {
            a[i] = h[i - 1];
            b[i] = 2.0 * (h[i - 1] + h[i]);
            c[i] = h[i];
            d[i] = 6.0 * (slope[i] - slope[i - 1]);
        }
        a[n - 1] = h[n - 2];
        b[n - 1] = 2.0 * h[n - 2];
        d[n - 1] = 6.0 * (dn - slope[n - 2]);
        let moments = tridiagonal(&a, &b, &c, &d);
        Ok(CubicSpline {
            knots,
            values,
            moments,
            periodic: false,
        })
    }

    /// Periodic spline; `knots` spans one period and the last value must
    /// repeat the first.
    pub fn periodic(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_knots(&knots, &values, 4)?;
        let n = knots.len() - 1;
        if (values[n] - values[0]).abs() > 1e-12 * (1.0 + values[0].abs()) {
            return Err(Error::Argument("periodic spline needs equal first and last values".into()));
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n).map(|i| (values[i + 1] - values[i]) / h[i]).collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 0..n {
            let hp = h[(i + n - 1) % n];
            a[i] = hp;
            b[i] = 2.0 * (hp + h[i]);
            c[i] = h[i];
            d[i] = 6.0 * (slope[i] - slope[(i + n - 1) % n]);
        }
        let mut moments = cyclic(&a, &b, &c, &d);
        moments.push(moments[0]);
        Ok(CubicSpline {
            knots,
            values,
            moments,
            periodic: true,
        })
    }

    pub fn period(&self) -> f64 {
        self.knots[self.knots.len() - 1] - self.knots[0]
    }

    /// Value and first three derivatives. Outside the knot range the end
    /// cubic is continued (or the argument wrapped when periodic).
    pub fn eval(&self, x: f64) -> Derivatives {
        let x0 = self.knots[0];
        let x = if self.periodic {
            x0 + (x - x0).rem_euclid(self.period())
        } else {
            x
        };
        let n = self.knots.len();
        let i = match self.knots.binary_search_by(|k| k.partial_cmp(&x).expect("finite knots")) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        let (xa, xb) = (self.knots[i], self.knots[i + 1]);
        let h = xb - xa;
        let (ma, mb) = (self.moments[i], self.moments[i + 1]);
        let (ya, yb) = (self.values[i], self.values[i + 1]);
        let (l, r) = (xb - x, x - xa);
        let ca = ya / h - ma * h / 6.0;
        let cb = yb / h - mb * h / 6.0;
        [
            ma * l.powi(3) / (6.0 * h) + mb * r.powi(3) / (6.0 * h) + ca * l + cb * r,
            -ma * l * l / (2.0 * h) + mb * r * r / (2.0 * h) - ca + cb,
            (ma * l + mb * r) / h,
            (mb - ma) / h,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamped_reproduces_cubics() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let knots: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64).collect();
        let values = knots.iter().map(|&x| f(x)).collect();
        let s = CubicSpline::clamped(knots, values, 1.0, 1.0).unwrap();
        for x in [-0.9, -0.31, 0.0, 0.42, 0.97] {
            let d = s.eval(x);
            assert!((d[0] - f(x)).abs() < 1e-12);
            assert!((d[1] - (3.0 * x * x - 2.0)).abs() < 1e-11);
            assert!((d[2] - 6.0 * x).abs() < 1e-10);
        }
    }

    #[test]
    fn periodic_trig_converges() {
        let n = 64;
        let p = 2.0 * std::f64::consts::PI;
        let knots: Vec<f64> = (0..=n).map(|i| p * i as f64 / n as f64).collect();
        let mut values: Vec<f64> = knots.iter().map(|x| x.sin()).collect();
        values[n] = values[0];
        let s = CubicSpline::periodic(knots, values).unwrap();
        for x in [0.1, 1.3, 4.0, 7.0] {
            assert!((s.eval(x)[0] - f64::sin(x)).abs() < 1e-6);
        }
    }
}
