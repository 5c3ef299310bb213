//! Smooth cutoff functions.

use crate::jet::Scalar;

fn f(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// C^∞ transition: 1 for `t <= 0`, 0 for `t >= 1`.
pub fn step_down(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = f(1.0 - t);
        a / (a + f(t))
    }
}

/// [`step_down`] for jets and other scalars (derivatives carried along).
pub fn step_down_scalar<S: Scalar>(t: S) -> S {
    let v = t.value().re;
    if v <= 0.0 {
        S::from_real(1.0)
    } else if v >= 1.0 {
        S::from_real(0.0)
    } else {
        let one = S::from_real(1.0);
        let a = (one - t).recip().scale((-1.0).into()).exp();
        let b = t.recip().scale((-1.0).into()).exp();
        a * (a + b).recip()
    }
}

/// C^∞ radial plateau: 1 for `r <= r1`, 0 for `r >= r2`.
pub fn plateau(r: f64, r1: f64, r2: f64) -> f64 {
    step_down((r - r1) / (r2 - r1))
}

/// C^∞ bump: `exp(-1/(1-s²))` for `|s| < 1`, scaled to 1 at the center.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}
