//! Built-in symbols addressable by name.

use super::{order_reducing_symbol, ClassicalSymbol, Coefficient, Excision, Expr, HomogeneousTerm, Sign};
use crate::cutoff::plateau;
use crate::error::{Error, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Plateau of the `variable_even` coefficient taper: 1 on `|x₁| <= 2`,
/// 0 on `|x₁| >= 3`.
pub const TAPER_INNER: f64 = 2.0;
pub const TAPER_OUTER: f64 = 3.0;

#[derive(Clone, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: &'static str,
    pub default: Option<f64>,
    pub doc: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub doc: &'static str,
    pub params: Vec<ParamSpec>,
}

fn p(name: &'static str, default: Option<f64>, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: "number",
        default,
        doc,
    }
}

/// Every registered symbol with its parameter schema.
pub fn entries() -> Vec<RegistryEntry> {
    vec![
        RegistryEntry {
            name: "frac_laplacian",
            doc: "|ξ|^{2a}",
            params: vec![p("a", None, "half the order, in (0,1)")],
        },
        RegistryEntry {
            name: "frac_laplacian_excised",
            doc: "(1-ζ(ξ))|ξ|^{2a}, ζ a quintic cutoff with radii 1/2 and 1",
            params: vec![p("a", None, "half the order")],
        },
        RegistryEntry {
            name: "chi_plus",
            doc: "(⟨ξ'⟩ + iξₙ)^t",
            params: vec![p("t", None, "order")],
        },
        RegistryEntry {
            name: "chi_minus",
            doc: "(⟨ξ'⟩ - iξₙ)^t",
            params: vec![p("t", None, "order")],
        },
        RegistryEntry {
            name: "variable_even",
            doc: "(1 + amplitude·taper(x₁)·sin x₁)|ξ|^{2a}, taper = 1 on |x₁|<=2, 0 on |x₁|>=3",
            params: vec![p("a", None, "half the order"), p("amplitude", Some(0.3), "coefficient amplitude, < 1")],
        },
        RegistryEntry {
            name: "bessel",
            doc: "⟨ξ⟩^s",
            params: vec![p("s", None, "order")],
        },
        RegistryEntry {
            name: "constant",
            doc: "constant symbol c",
            params: vec![p("c", Some(1.0), "value")],
        },
        RegistryEntry {
            name: "odd_perturbation",
            doc: "|ξ|^{2a} + eps·ξₙ|ξ|^{2a-1}, even part plus an odd part of the same order",
            params: vec![p("a", None, "half the order"), p("eps", Some(0.5), "size of the odd part")],
        },
    ]
}

pub fn frac_laplacian(dim: usize, a: f64) -> ClassicalSymbol {
    ClassicalSymbol::new(
        format!("frac_laplacian({a})"),
        dim,
        2.0 * a,
        f64::INFINITY,
        vec![HomogeneousTerm::new(2.0 * a, Expr::AbsPow(2.0 * a))],
    )
}

pub fn frac_laplacian_excised(dim: usize, a: f64) -> ClassicalSymbol {
    let mut s = frac_laplacian(dim, a).with_excision(Excision::default());
    s.name = format!("frac_laplacian_excised({a})");
    s
}

pub fn chi_plus(dim: usize, t: f64) -> ClassicalSymbol {
    order_reducing_symbol(dim, t, Sign::Plus)
}

pub fn chi_minus(dim: usize, t: f64) -> ClassicalSymbol {
    order_reducing_symbol(dim, t, Sign::Minus)
}

/// The coefficient `1 + amplitude·taper(x₁)·sin x₁`.
pub fn variable_coefficient(amplitude: f64) -> Coefficient {
    Coefficient::real(format!("1+{amplitude}*taper*sin"), move |x: &[f64]| {
        1.0 + amplitude * plateau(x[0].abs(), TAPER_INNER, TAPER_OUTER) * x[0].sin()
    })
}

pub fn variable_even(dim: usize, a: f64, amplitude: f64) -> ClassicalSymbol {
    let e = Expr::mul(Expr::Coefficient(variable_coefficient(amplitude)), Expr::AbsPow(2.0 * a));
    ClassicalSymbol::new(
        format!("variable_even({a},{amplitude})"),
        dim,
        2.0 * a,
        f64::INFINITY,
        vec![HomogeneousTerm::new(2.0 * a, e)],
    )
}

pub fn bessel(dim: usize, s: f64) -> ClassicalSymbol {
    ClassicalSymbol::new(
        format!("bessel({s})"),
        dim,
        s,
        f64::INFINITY,
        vec![HomogeneousTerm {
            degree: s,
            expr: Expr::BracketPow(s),
            principal: Some(Expr::AbsPow(s)),
        }],
    )
}

pub fn constant(dim: usize, c: f64) -> ClassicalSymbol {
    ClassicalSymbol::new(
        format!("constant({c})"),
        dim,
        0.0,
        f64::INFINITY,
        vec![HomogeneousTerm::new(0.0, Expr::constant(c))],
    )
}

pub fn odd_perturbation(dim: usize, a: f64, eps: f64) -> ClassicalSymbol {
    let odd = Expr::mul(
        Expr::mul(Expr::constant(eps), Expr::Component(dim - 1)),
        Expr::AbsPow(2.0 * a - 1.0),
    );
    ClassicalSymbol::new(
        format!("odd_perturbation({a},{eps})"),
        dim,
        2.0 * a,
        f64::INFINITY,
        vec![HomogeneousTerm::new(2.0 * a, Expr::add(Expr::AbsPow(2.0 * a), odd))],
    )
}

fn param(params: &Map<String, Value>, spec: &ParamSpec, symbol: &str) -> Result<f64> {
    match params.get(spec.name) {
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::Argument(format!("{symbol}.{} must be a number", spec.name))),
        None => spec
            .default
            .ok_or_else(|| Error::Argument(format!("{symbol} needs parameter '{}'", spec.name))),
    }
}

/// Builds a registered symbol from its name and a JSON parameter object.
pub fn build(name: &str, dim: usize, params: &Map<String, Value>) -> Result<ClassicalSymbol> {
    let entry = entries()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Argument(format!("unknown symbol '{name}'")))?;
    for key in params.keys() {
        if !entry.params.iter().any(|p| p.name == key) {
            return Err(Error::Argument(format!("{name} has no parameter '{key}'")));
        }
    }
    let v: Vec<f64> = entry
        .params
        .iter()
        .map(|s| param(params, s, name))
        .collect::<Result<_>>()?;
    Ok(match name {
        "frac_laplacian" => frac_laplacian(dim, v[0]),
        "frac_laplacian_excised" => frac_laplacian_excised(dim, v[0]),
        "chi_plus" => chi_plus(dim, v[0]),
        "chi_minus" => chi_minus(dim, v[0]),
        "variable_even" => variable_even(dim, v[0], v[1]),
        "bessel" => bessel(dim, v[0]),
        "constant" => constant(dim, v[0]),
        "odd_perturbation" => odd_perturbation(dim, v[0], v[1]),
        _ => unreachable!("registry entry without constructor"),
    })
}
