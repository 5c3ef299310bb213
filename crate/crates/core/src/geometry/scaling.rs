//! Boundary and symbol rescaling `γ_R`, `p_R`.

use super::{BoundaryFunction, Derivatives, MAX_BOUNDARY_DERIVATIVE};
use crate::cutoff::step_down_scalar;
use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::symbols::Symbol;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

/// `η(x) = 1` for `|x| <= inner`, `0` for `|x| >= outer`, smooth in `|x|²`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RadialCutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Default for RadialCutoff {
    fn default() -> Self {
        RadialCutoff { inner: 1.0, outer: 2.0 }
    }
}

impl RadialCutoff {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::Argument(format!("cutoff radii must satisfy 0 < inner < outer, got {inner}, {outer}")));
        }
        Ok(RadialCutoff { inner, outer })
    }

    fn arg<S: Scalar>(&self, r2: S) -> S {
        let (a, b) = (self.inner * self.inner, self.outer * self.outer);
        (r2 - S::from_real(a)).scale(Complex64::new(1.0 / (b - a), 0.0))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        step_down_scalar(self.arg(Complex64::new(r2, 0.0))).re
    }

    /// Jet in one variable along the first axis.
    pub fn jet_1d(&self, s: f64) -> Jet {
        let t = Jet::variable(0, s);
        step_down_scalar(self.arg(t * t))
    }
}

/// `γ_R` with its discrete `C^{1+τ}` norm.
#[derive(Clone, Debug)]
pub struct RescaledBoundary {
    pub r: f64,
    pub gamma: BoundaryFunction,
    pub norm: f64,
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Argument(format!("scale R must lie in (0, 1], got {r}")));
    }
    Ok(())
}

/// Samples for the norm of a rescaled boundary.
const NORM_SAMPLES: usize = 801;

/// `γ_R(x') = R^{-1} η(x') γ(R x')`.
pub fn rescale_boundary(gamma: &BoundaryFunction, r: f64, eta: RadialCutoff) -> Result<RescaledBoundary> {
    check_r(r)?;
    gamma.require_normalized()?;
    let g = gamma.clone();
    let scaled = BoundaryFunction::new(format!("({})_R={r}", gamma.name), gamma.hoelder, move |s| {
        let d = g.derivatives(r * s);
        let mut inner = Jet::constant(Complex64::new(d[0], 0.0));
        let mut fact = 1.0;
        for (k, dk) in d.iter().enumerate().skip(1) {
            fact *= k as f64;
            inner.set_coef(k, 0, Complex64::new(dk * r.powi(k as i32) / fact, 0.0));
        }
        let prod = (eta.jet_1d(s) * inner).scale(Complex64::new(1.0 / r, 0.0));
        let mut out: Derivatives = [0.0; MAX_BOUNDARY_DERIVATIVE + 1];
        for (k, o) in out.iter_mut().enumerate() {
            *o = prod.derivative(k, 0).re;
        }
        out
    });
    let norm = scaled.norm_c1tau(eta.outer, NORM_SAMPLES);
    Ok(RescaledBoundary {
        r,
        gamma: scaled,
        norm,
    })
}

/// `‖γ_R‖_{C^{1+τ}} / R^{min(1,τ)}` for each `R`.
pub fn scaling_sequence(gamma: &BoundaryFunction, rs: &[f64], eta: RadialCutoff) -> Result<Vec<f64>> {
    let e = gamma.hoelder.min(1.0);
    rs.iter()
        .map(|&r| Ok(rescale_boundary(gamma, r, eta)?.norm / r.powf(e)))
        .collect()
}

/// `p_R(x,ξ) = η(x) p(Rx, ξ) + (1 - η(x)) p(0, ξ)`.
#[derive(Clone)]
pub struct RescaledSymbol {
    pub p: Arc<dyn Symbol>,
    pub r: f64,
    pub eta: RadialCutoff,
}

impl RescaledSymbol {
    fn parts(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let e = self.eta.value(x);
        (e, x.iter().map(|v| self.r * v).collect(), vec![0.0; x.len()])
    }
}

impl Symbol for RescaledSymbol {
    fn dim(&self) -> usize {
        self.p.dim()
    }
    fn order(&self) -> f64 {
        self.p.order()
    }
    fn depends_on_x(&self) -> bool {
        self.p.depends_on_x()
    }
    fn hoelder(&self) -> f64 {
        self.p.hoelder()
    }
    fn name(&self) -> String {
        format!("({})_R={}", self.p.name(), self.r)
    }
    fn value(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        if !self.p.depends_on_x() {
            return self.p.value(x, xi);
        }
        let (e, rx, zero) = self.parts(x);
        self.p.value(&rx, xi) * e + self.p.value(&zero, xi) * (1.0 - e)
    }
    fn jet(&self, x: &[f64], xi: &[f64]) -> Option<Jet> {
        if !self.p.depends_on_x() {
            return self.p.jet(x, xi);
        }
        let (e, rx, zero) = self.parts(x);
        let a = self.p.jet(&rx, xi)?;
        let b = self.p.jet(&zero, xi)?;
        Some(a.scale(Complex64::new(e, 0.0)) + b.scale(Complex64::new(1.0 - e, 0.0)))
    }
}

pub fn rescale_symbol(p: Arc<dyn Symbol>, r: f64, eta: RadialCutoff) -> Result<RescaledSymbol> {
    check_r(r)?;
    Ok(RescaledSymbol { p, r, eta })
}
