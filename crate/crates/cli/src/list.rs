//! `fracdo list`: registry, domains, presets and the config schema.

use crate::config::tolerance_docs;
use fracdo::symbols::registry::entries;
use serde_json::{json, Map, Value};

const DOMAINS: [(&str, &str, &[&str]); 3] = [
    ("interval", "(a, b) in 1D", &["a", "b"]),
    ("halfspace", "{x_n > 0}", &[]),
    ("ellipse", "x1²/a1² + x2²/a2² < 1 in 2D", &["a1", "a2"]),
];

/// Ready-made configs; each value is a complete config document.
fn presets() -> Vec<(&'static str, Value)> {
    vec![
        (
            "half-laplacian-interval",
            json!({"command": "solve-dirichlet", "symbol": {"name": "frac_laplacian", "params": {"a": 0.5}},
                   "domain": {"kind": "interval", "a": -1.0, "b": 1.0}, "grid": {"n": 1, "N": 1024, "L": 8.0}}),
        ),
        (
            "variable-universality",
            json!({"command": "universality", "symbol": {"name": "variable_even", "params": {"a": 0.5, "amplitude": 0.3}},
                   "domain": {"kind": "interval", "a": -1.0, "b": 1.0}, "grid": {"n": 1, "N": 2048, "L": 8.0}}),
        ),
        (
            "ellipse-2d",
            json!({"command": "verify-regularity", "symbol": {"name": "frac_laplacian", "params": {"a": 0.5}},
                   "domain": {"kind": "ellipse", "a1": 1.0, "a2": 0.5}, "grid": {"n": 2, "N": 256, "L": 8.0},
                   "tolerances": {"beta": 0.1}}),
        ),
        (
            "chi-plus-transmission",
            json!({"command": "check-transmission", "symbol": {"name": "chi_plus", "params": {"t": 0.5}},
                   "grid": {"n": 2, "N": 64, "L": 8.0}, "experiment": {"mu": 0.5}}),
        ),
    ]
}

pub fn text() -> String {
    let mut s = String::from("symbols:\n");
    for e in entries() {
        let params: Vec<String> = e
            .params
            .iter()
            .map(|p| match p.default {
                Some(d) => format!("{}={d}", p.name),
                None => p.name.to_string(),
            })
            .collect();
        s.push_str(&format!("  {}({})  {}\n", e.name, params.join(", "), e.doc));
    }
    s.push_str("  compose: [symbol, symbol, ...]  product of the listed symbols\n");
    s.push_str("domains:\n");
    for (name, doc, params) in DOMAINS {
        s.push_str(&format!("  {name}({})  {doc}\n", params.join(", ")));
    }
    s.push_str("presets:\n");
    for (name, cfg) in presets() {
        s.push_str(&format!("  {name}: {cfg}\n"));
    }
    s.push_str("tolerances:\n");
    for (name, default, doc) in tolerance_docs() {
        s.push_str(&format!("  {name} = {default:e}  {doc}\n"));
    }
    s
}

fn number() -> Value {
    json!({"type": "number"})
}

/// JSON Schema (draft 2020-12) of the config, with the registry attached.
pub fn json() -> String {
    let symbol_variants: Vec<Value> = entries()
        .into_iter()
        .map(|e| {
            let props: Map<String, Value> = e
                .params
                .iter()
                .map(|p| {
                    let mut v = json!({"type": "number", "description": p.doc});
                    if let Some(d) = p.default {
                        v["default"] = json!(d);
                    }
                    (p.name.to_string(), v)
                })
                .collect();
            let required: Vec<&str> = e.params.iter().filter(|p| p.default.is_none()).map(|p| p.name).collect();
            json!({
                "description": e.doc,
                "type": "object",
                "properties": {
                    "name": {"const": e.name},
                    "params": {"type": "object", "properties": props, "required": required, "additionalProperties": false}
                },
                "required": ["name"],
                "additionalProperties": false
            })
        })
        .collect();
    let mut symbol_variants = symbol_variants;
    symbol_variants.push(json!({
        "type": "object",
        "properties": {"compose": {"type": "array", "items": {"$ref": "#/$defs/symbol"}, "minItems": 2}},
        "required": ["compose"],
        "additionalProperties": false
    }));
    let domains: Vec<Value> = DOMAINS
        .iter()
        .map(|(name, doc, params)| {
            let mut props = Map::new();
            props.insert("kind".into(), json!({"const": name}));
            for p in *params {
                props.insert(p.to_string(), number());
            }
            let mut req = vec!["kind"];
            req.extend(params.iter());
            json!({"description": doc, "type": "object", "properties": props, "required": req, "additionalProperties": false})
        })
        .collect();
    let tolerances: Map<String, Value> = tolerance_docs()
        .into_iter()
        .map(|(n, d, doc)| (n.to_string(), json!({"type": "number", "exclusiveMinimum": 0, "default": d, "description": doc})))
        .collect();
    let schema = json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "fracdo experiment config",
        "type": "object",
        "required": ["grid"],
        "additionalProperties": false,
        "properties": {
            "command": {"type": "string"},
            "symbol": {"$ref": "#/$defs/symbol"},
            "domain": {"oneOf": domains},
            "grid": {
                "type": "object",
                "required": ["n", "N", "L"],
                "additionalProperties": false,
                "properties": {
                    "n": {"enum": [1, 2], "description": "space dimension"},
                    "N": {"type": "integer", "minimum": 2, "description": "nodes per dimension"},
                    "L": {"type": "number", "exclusiveMinimum": 0, "description": "torus side length"}
                }
            },
            "tolerances": {"type": "object", "properties": tolerances, "additionalProperties": false},
            "seed": {"type": "integer", "minimum": 0, "default": 0},
            "experiment": {"type": "object", "description": "command-specific settings, all optional"}
        },
        "$defs": {"symbol": {"oneOf": symbol_variants}},
        "x-presets": presets().into_iter().map(|(n, v)| (n.to_string(), v)).collect::<Map<String, Value>>(),
    });
    let mut s = serde_json::to_string_pretty(&schema).expect("schema serializes");
    s.push('\n');
    s
}
