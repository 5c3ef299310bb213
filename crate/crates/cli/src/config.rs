//! Experiment configuration: JSON schema, `--set` overrides and validation.

use fracdo::grid::{DomainKind, DomainMask, TorusGrid};
use fracdo::symbols::registry;
use fracdo::symbols::{multiply_symbols, ClassicalSymbol};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::Path;

/// Configuration error; always exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A strictly positive number.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(try_from = "f64", into = "f64")]
pub struct Positive(pub f64);

impl TryFrom<f64> for Positive {
    type Error = String;
    fn try_from(v: f64) -> Result<Self, String> {
        if v > 0.0 && v.is_finite() {
            Ok(Positive(v))
        } else {
            Err(format!("must be a positive number, got {v}"))
        }
    }
}

impl From<Positive> for f64 {
    fn from(p: Positive) -> f64 {
        p.0
    }
}

/// A registered symbol with parameters, or a composition of symbols.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawSymbol", into = "RawSymbol")]
pub enum SymbolSpec {
    Named { name: String, params: Map<String, Value> },
    Compose(Vec<SymbolSpec>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymbol {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    compose: Option<Vec<SymbolSpec>>,
}

impl TryFrom<RawSymbol> for SymbolSpec {
    type Error = String;
    fn try_from(r: RawSymbol) -> Result<Self, String> {
        match (r.name, r.compose) {
            (Some(name), None) => {
                let entry = registry::entries()
                    .into_iter()
                    .find(|e| e.name == name)
                    .ok_or_else(|| format!("unknown symbol `{name}` (see `fracdo list`)"))?;
                for (k, v) in &r.params {
                    if !entry.params.iter().any(|p| p.name == k) {
                        return Err(format!("symbol `{name}` has no parameter `{k}`"));
                    }
                    if !v.is_number() {
                        return Err(format!("parameter `{k}` of `{name}` must be a number"));
                    }
                }
                if let Some(p) = entry.params.iter().find(|p| p.default.is_none() && !r.params.contains_key(p.name)) {
                    return Err(format!("symbol `{name}` needs parameter `{}`", p.name));
                }
                Ok(SymbolSpec::Named { name, params: r.params })
            }
            (None, Some(_)) if !r.params.is_empty() => Err("`params` is not allowed next to `compose`".into()),
            (None, Some(parts)) if parts.len() >= 2 => Ok(SymbolSpec::Compose(parts)),
            (None, Some(_)) => Err("`compose` needs at least two symbols".into()),
            (Some(_), Some(_)) => Err("give either `name` or `compose`, not both".into()),
            (None, None) => Err("missing field `name`".into()),
        }
    }
}

impl From<SymbolSpec> for RawSymbol {
    fn from(s: SymbolSpec) -> Self {
        match s {
            SymbolSpec::Named { name, params } => RawSymbol {
                name: Some(name),
                params,
                compose: None,
            },
            SymbolSpec::Compose(parts) => RawSymbol {
                name: None,
                params: Map::new(),
                compose: Some(parts),
            },
        }
    }
}

impl SymbolSpec {
    pub fn named(name: &str, params: &[(&str, f64)]) -> Self {
        SymbolSpec::Named {
            name: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), Value::from(*v))).collect(),
        }
    }

    pub fn build(&self, dim: usize) -> fracdo::Result<ClassicalSymbol> {
        match self {
            SymbolSpec::Named { name, params } => registry::build(name, dim, params),
            SymbolSpec::Compose(parts) => {
                let mut acc = parts[0].build(dim)?;
                for p in &parts[1..] {
                    acc = multiply_symbols(&acc, &p.build(dim)?)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            SymbolSpec::Named { name, params } => {
                let args: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{name}({})", args.join(";"))
            }
            SymbolSpec::Compose(parts) => parts.iter().map(SymbolSpec::label).collect::<Vec<_>>().join("*"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Halfspace,
    Ellipse { a1: Positive, a2: Positive },
}

impl DomainSpec {
    pub fn kind(&self) -> DomainKind {
        match *self {
            DomainSpec::Interval { a, b } => DomainKind::Interval { a, b },
            DomainSpec::Halfspace => DomainKind::Halfspace,
            DomainSpec::Ellipse { a1, a2 } => DomainKind::Ellipse { a1: a1.0, a2: a2.0 },
        }
    }

    /// Whether this is the unit ball of its dimension.
    pub fn is_unit_ball(&self) -> bool {
        match *self {
            DomainSpec::Interval { a, b } => a == -1.0 && b == 1.0,
            DomainSpec::Ellipse { a1, a2 } => a1.0 == 1.0 && a2.0 == 1.0,
            DomainSpec::Halfspace => false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Space dimension, 1 or 2.
    pub n: usize,
    #[serde(rename = "N")]
    pub nodes: usize,
    #[serde(rename = "L")]
    pub length: Positive,
}

impl GridSpec {
    pub fn torus(&self) -> Result<TorusGrid, ConfigError> {
        TorusGrid::new(self.n, self.nodes, self.length.0).map_err(|e| ConfigError(format!("grid: {e}")))
    }
}

fn d(v: f64) -> Positive {
    Positive(v)
}

macro_rules! tolerances {
    ($($name:ident = $default:expr, $doc:literal;)*) => {
        #[derive(Clone, Debug, Serialize, Deserialize)]
        #[serde(deny_unknown_fields, default)]
        pub struct Tolerances {
            $(#[doc = $doc] pub $name: Positive,)*
        }
        impl Default for Tolerances {
            fn default() -> Self {
                Tolerances { $($name: d($default),)* }
            }
        }
        pub fn tolerance_docs() -> Vec<(&'static str, f64, &'static str)> {
            vec![$((stringify!($name), $default, $doc),)*]
        }
    };
}

tolerances! {
    transmission = 1e-8, "relative residual of the transmission conditions";
    parity = 1e-10, "relative parity residual";
    identity = 1e-8, "reduction identity, relative to the sup norm of u";
    diagonal = 1e-10, "diagonal residual of each remainder";
    operator = 0.05, "relative L2 gap between operator realisations";
    slope = 0.9, "required fraction of the ideal log-log slope";
    scaling_ratio = 3.0, "max/min of the normalised scaling sequence";
    reducer = 1e-12, "composition and adjoint identities of the order reducers";
    residual = 1e-10, "relative solver residual";
    l2 = 0.05, "relative L2 error against a closed-form solution";
    beta = 0.07, "half-width of the accepted boundary-exponent interval around a";
    trace = 0.03, "relative deviation of the weighted trace";
    hoelder_growth = 1.25, "largest accepted ratio of Hoelder quotients under refinement";
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SampleSet {
    Halfspace,
    Curved,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeKind {
    Left,
    Right,
    Separable,
    Affine,
    Transformed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Square,
    SinSquared,
    Power { tau: Positive },
    EpsSin { eps: f64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FitModelSpec {
    Plain,
    Augmented,
}

/// Command-specific settings; every field is optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<fracdo::symbols::Parity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<AmplitudeKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<Positive>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<BoundarySpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<Positive>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<(Positive, Positive)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<(f64, Positive)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_correction: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(Positive, Positive)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_model: Option<FitModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<SymbolSpec>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub experiment: Experiment,
}

impl Config {
    pub fn symbol_spec(&self, command: &str) -> Result<&SymbolSpec, ConfigError> {
        self.symbol
            .as_ref()
            .ok_or_else(|| ConfigError(format!("symbol: required by `{command}`")))
    }

    pub fn symbol(&self, command: &str) -> Result<ClassicalSymbol, ConfigError> {
        self.symbol_spec(command)?
            .build(self.grid.n)
            .map_err(|e| ConfigError(format!("symbol: {e}")))
    }

    pub fn domain_spec(&self, command: &str) -> Result<&DomainSpec, ConfigError> {
        self.domain
            .as_ref()
            .ok_or_else(|| ConfigError(format!("domain: required by `{command}`")))
    }

    pub fn mask(&self, command: &str) -> Result<DomainMask, ConfigError> {
        let spec = self.domain_spec(command)?;
        DomainMask::new(self.grid.torus()?, spec.kind()).map_err(|e| ConfigError(format!("domain: {e}")))
    }
}

/// Splits `key=value`; the value is JSON when it parses, a string otherwise.
pub fn parse_override(s: &str) -> Result<(Vec<String>, Value), ConfigError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("--set {s}: expected key=value")))?;
    let path: Vec<String> = k.split('.').map(str::to_owned).collect();
    if path.iter().any(String::is_empty) {
        return Err(ConfigError(format!("--set {s}: empty key segment")));
    }
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_owned()));
    Ok((path, value))
}

fn apply_override(root: &mut Value, path: &[String], value: Value) -> Result<(), ConfigError> {
    let mut cur = root;
    for (i, seg) in path.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| ConfigError(format!("--set {}: `{}` is not an object", path.join("."), path[..i].join("."))))?;
        if i + 1 == path.len() {
            obj.insert(seg.clone(), value);
            return Ok(());
        }
        cur = obj.entry(seg.clone()).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

/// Reads, overrides and validates a config. Errors name the file, the
/// line and column, and the offending key path.
pub fn load(path: &Path, overrides: &[String]) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let file = path.display();
    let located = |e: serde_path_to_error::Error<serde_json::Error>| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        let key = if key == "." { String::new() } else { format!(" {key}:") };
        ConfigError(format!("{file}:{}:{}:{key} {}", inner.line(), inner.column(), strip_position(&inner)))
    };
    if overrides.is_empty() {
        let de = &mut serde_json::Deserializer::from_str(&text);
        return serde_path_to_error::deserialize(de).map_err(located);
    }
    let mut root: Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("{file}:{}:{}: {}", e.line(), e.column(), strip_position(&e))))?;
    for o in overrides {
        let (p, v) = parse_override(o)?;
        apply_override(&mut root, &p, v)?;
    }
    serde_path_to_error::deserialize(root).map_err(|e| {
        let key = e.path().to_string();
        ConfigError(format!("{file} (with --set overrides): {key}: {}", e.into_inner()))
    })
}

/// serde_json appends " at line L column C"; the location is printed first.
fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_owned(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        std::io::Write::write_all(&mut f, text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn missing_key_is_named_with_line() {
        let f = write("{\n  \"grid\": {\n    \"n\": 1,\n    \"L\": 8\n  }\n}\n");
        let e = load(f.path(), &[]).unwrap_err().0;
        assert!(e.contains("grid:"), "{e}");
        assert!(e.contains("missing field `N`"), "{e}");
        assert!(e.contains(":5:"), "{e}");
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let f = write(r#"{"grid": {"n": 1, "N": 64, "L": 8}}"#);
        let c = load(f.path(), &["grid.N=128".into(), "seed=7".into()]).unwrap();
        assert_eq!(c.grid.nodes, 128);
        assert_eq!(c.seed, 7);
        let e = load(f.path(), &["grid.L=-1".into()]).unwrap_err().0;
        assert!(e.contains("grid.L") && e.contains("positive"), "{e}");
    }

    #[test]
    fn symbol_validation() {
        let f = write("{\"grid\": {\"n\": 1, \"N\": 64, \"L\": 8},\n \"symbol\": {\"name\": \"nope\"}}");
        let e = load(f.path(), &[]).unwrap_err().0;
        assert!(e.contains(":2:") && e.contains("unknown symbol"), "{e}");
        let f = write(r#"{"grid": {"n": 1, "N": 64, "L": 8}, "symbol": {"name": "frac_laplacian"}}"#);
        assert!(load(f.path(), &[]).unwrap_err().0.contains("needs parameter `a`"));
        let f = write(
            r#"{"grid": {"n": 1, "N": 64, "L": 8},
                "symbol": {"compose": [{"name": "bessel", "params": {"s": 1}}, {"name": "chi_plus", "params": {"t": 0.5}}]}}"#,
        );
        let c = load(f.path(), &[]).unwrap();
        let p = c.symbol("x").unwrap();
        assert!((p.order - 1.5).abs() < 1e-15);
    }
}
