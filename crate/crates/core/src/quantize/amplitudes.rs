//! Standard amplitudes.

use super::PointAmplitude;
use crate::jet::Jet;
use crate::symbols::{Coefficient, Symbol};
use num_complex::Complex64;
use std::sync::Arc;

/// `a(x, y, ξ) = p(x, ξ)`.
pub struct LeftSymbol(pub Arc<dyn Symbol>);

impl PointAmplitude for LeftSymbol {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn order(&self) -> f64 {
        self.0.order()
    }
    fn hoelder(&self) -> f64 {
        self.0.hoelder()
    }
    fn name(&self) -> String {
        format!("p(x,ξ) [{}]", self.0.name())
    }
    fn value(&self, x: &[f64], _y: &[f64], xi: &[f64]) -> Complex64 {
        self.0.value(x, xi)
    }
    fn xi_jet(&self, x: &[f64], _y: &[f64], xi: &[f64]) -> Option<Jet> {
        self.0.jet(x, xi)
    }
}

/// `a(x, y, ξ) = p(y, ξ)`.
pub struct RightSymbol(pub Arc<dyn Symbol>);

impl PointAmplitude for RightSymbol {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn order(&self) -> f64 {
        self.0.order()
    }
    fn hoelder(&self) -> f64 {
        self.0.hoelder()
    }
    fn name(&self) -> String {
        format!("p(y,ξ) [{}]", self.0.name())
    }
    fn value(&self, _x: &[f64], y: &[f64], xi: &[f64]) -> Complex64 {
        self.0.value(y, xi)
    }
    fn xi_jet(&self, _x: &[f64], y: &[f64], xi: &[f64]) -> Option<Jet> {
        self.0.jet(y, xi)
    }
}

/// `a(x, y, ξ) = φ(y) p(x, ξ)`.
pub struct Separable {
    pub phi: Coefficient,
    pub p: Arc<dyn Symbol>,
}

impl PointAmplitude for Separable {
    fn dim(&self) -> usize {
        self.p.dim()
    }
    fn order(&self) -> f64 {
        self.p.order()
    }
    fn hoelder(&self) -> f64 {
        self.p.hoelder()
    }
    fn name(&self) -> String {
        format!("{}(y)·{}", self.phi.name, self.p.name())
    }
    fn value(&self, x: &[f64], y: &[f64], xi: &[f64]) -> Complex64 {
        self.phi.eval(y) * self.p.value(x, xi)
    }
    fn xi_jet(&self, x: &[f64], y: &[f64], xi: &[f64]) -> Option<Jet> {
        self.p.jet(x, xi).map(|j| j.scale(self.phi.eval(y)))
    }
}

/// `a(x, y, ξ) = φ(x) p(x, ξ)`.
pub struct LeftFactor {
    pub phi: Coefficient,
    pub p: Arc<dyn Symbol>,
}

impl PointAmplitude for LeftFactor {
    fn dim(&self) -> usize {
        self.p.dim()
    }
    fn order(&self) -> f64 {
        self.p.order()
    }
    fn hoelder(&self) -> f64 {
        self.p.hoelder()
    }
    fn name(&self) -> String {
        format!("{}(x)·{}", self.phi.name, self.p.name())
    }
    fn value(&self, x: &[f64], _y: &[f64], xi: &[f64]) -> Complex64 {
        self.phi.eval(x) * self.p.value(x, xi)
    }
    fn xi_jet(&self, x: &[f64], _y: &[f64], xi: &[f64]) -> Option<Jet> {
        self.p.jet(x, xi).map(|j| j.scale(self.phi.eval(x)))
    }
}

/// `a(x, y, ξ) = (c₀ + c₁·y) p(x, ξ)`.
pub struct AffineInY {
    pub c0: f64,
    pub c1: Vec<f64>,
    pub p: Arc<dyn Symbol>,
}

impl AffineInY {
    fn factor(&self, y: &[f64]) -> f64 {
        self.c0 + self.c1.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
    }
}

impl PointAmplitude for AffineInY {
    fn dim(&self) -> usize {
        self.p.dim()
    }
    fn order(&self) -> f64 {
        self.p.order()
    }
    fn hoelder(&self) -> f64 {
        self.p.hoelder()
    }
    fn name(&self) -> String {
        format!("({} + {:?}·y)·{}", self.c0, self.c1, self.p.name())
    }
    fn value(&self, x: &[f64], y: &[f64], xi: &[f64]) -> Complex64 {
        self.p.value(x, xi) * self.factor(y)
    }
    fn xi_jet(&self, x: &[f64], y: &[f64], xi: &[f64]) -> Option<Jet> {
        self.p.jet(x, xi).map(|j| j.scale(Complex64::new(self.factor(y), 0.0)))
    }
}

type AmpFn = dyn Fn(&[f64], &[f64], &[f64]) -> Complex64 + Send + Sync;

/// Amplitude given by a closure.
#[derive(Clone)]
pub struct FnAmplitude {
    pub name: String,
    pub dim: usize,
    pub order: f64,
    pub hoelder: f64,
    pub f: Arc<AmpFn>,
}

impl PointAmplitude for FnAmplitude {
    fn dim(&self) -> usize {
        self.dim
    }
    fn order(&self) -> f64 {
        self.order
    }
    fn hoelder(&self) -> f64 {
        self.hoelder
    }
    fn name(&self) -> String {
        self.name.clone()
    }
    fn value(&self, x: &[f64], y: &[f64], xi: &[f64]) -> Complex64 {
        (self.f)(x, y, xi)
    }
}
