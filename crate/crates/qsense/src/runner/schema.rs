//! Typed parameter schemas and their validation.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{ConfigViolation, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamKind {
    Number,
    Integer,
    Bool,
    Choice(&'static [&'static str]),
    NumberList,
    IntegerList,
}

impl ParamKind {
    fn type_name(self) -> &'static str {
        match self {
            ParamKind::Number => "number",
            ParamKind::Integer => "integer",
            ParamKind::Bool => "boolean",
            ParamKind::Choice(_) => "string",
            ParamKind::NumberList => "array<number>",
            ParamKind::IntegerList => "array<integer>",
        }
    }
}

/// Numeric limit; `inclusive` distinguishes `>=` from `>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limit {
    pub value: f64,
    pub inclusive: bool,
}

/// One parameter accepted by an experiment. Bounds apply element-wise to
/// lists.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub doc: &'static str,
    /// `None` marks the parameter as required.
    pub default: Option<Value>,
    pub min: Option<Limit>,
    pub max: Option<Limit>,
}

impl ParamSpec {
    fn new(name: &'static str, kind: ParamKind, doc: &'static str) -> Self {
        Self { name, kind, doc, default: None, min: None, max: None }
    }

    pub fn number(name: &'static str, doc: &'static str) -> Self {
        Self::new(name, ParamKind::Number, doc)
    }

    pub fn integer(name: &'static str, doc: &'static str) -> Self {
        Self::new(name, ParamKind::Integer, doc)
    }

    pub fn boolean(name: &'static str, doc: &'static str) -> Self {
        Self::new(name, ParamKind::Bool, doc)
    }

    pub fn choice(name: &'static str, options: &'static [&'static str], doc: &'static str) -> Self {
        Self::new(name, ParamKind::Choice(options), doc)
    }

    pub fn numbers(name: &'static str, doc: &'static str) -> Self {
        Self::new(name, ParamKind::NumberList, doc)
    }

    pub fn integers(name: &'static str, doc: &'static str) -> Self {
        Self::new(name, ParamKind::IntegerList, doc)
    }

    pub fn default(mut self, v: impl Into<Value>) -> Self {
        self.default = Some(v.into());
        self
    }

    pub fn positive(mut self) -> Self {
        self.min = Some(Limit { value: 0.0, inclusive: false });
        self
    }

    pub fn at_least(mut self, v: f64) -> Self {
        self.min = Some(Limit { value: v, inclusive: true });
        self
    }

    pub fn at_most(mut self, v: f64) -> Self {
        self.max = Some(Limit { value: v, inclusive: true });
        self
    }

    pub fn below(mut self, v: f64) -> Self {
        self.max = Some(Limit { value: v, inclusive: false });
        self
    }

    /// Machine-readable description used by `list`.
    pub fn describe(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), json!(self.name));
        m.insert("type".into(), json!(self.kind.type_name()));
        m.insert("required".into(), json!(self.default.is_none()));
        if let Some(d) = &self.default {
            m.insert("default".into(), d.clone());
        }
        if let ParamKind::Choice(opts) = self.kind {
            m.insert("choices".into(), json!(opts));
        }
        if let Some(l) = self.min {
            m.insert(if l.inclusive { "minimum" } else { "exclusive_minimum" }.into(), json!(l.value));
        }
        if let Some(l) = self.max {
            m.insert(if l.inclusive { "maximum" } else { "exclusive_maximum" }.into(), json!(l.value));
        }
        m.insert("description".into(), json!(self.doc));
        Value::Object(m)
    }

    fn check_range(&self, x: f64, path: &str, out: &mut Vec<ConfigViolation>) {
        if let Some(l) = self.min {
            if x < l.value || (!l.inclusive && x == l.value) {
                let op = if l.inclusive { ">=" } else { ">" };
                out.push(violation(path, format!("must be {op} {}, got {x}", l.value)));
            }
        }
        if let Some(l) = self.max {
            if x > l.value || (!l.inclusive && x == l.value) {
                let op = if l.inclusive { "<=" } else { "<" };
                out.push(violation(path, format!("must be {op} {}, got {x}", l.value)));
            }
        }
    }

    fn check_scalar(&self, v: &Value, integer: bool, path: &str, out: &mut Vec<ConfigViolation>) {
        let x = if integer {
            if let Some(u) = v.as_u64() {
                u as f64
            } else {
                let msg = if v.is_i64() { "must be a non-negative integer" } else { "expected an integer" };
                out.push(violation(path, format!("{msg}, got {v}")));
                return;
            }
        } else {
            match v.as_f64() {
                Some(x) => x,
                None => {
                    out.push(violation(path, format!("expected a number, got {v}")));
                    return;
                }
            }
        };
        self.check_range(x, path, out);
    }

    fn check(&self, v: &Value, path: &str, out: &mut Vec<ConfigViolation>) {
        match self.kind {
            ParamKind::Number => self.check_scalar(v, false, path, out),
            ParamKind::Integer => self.check_scalar(v, true, path, out),
            ParamKind::Bool => {
                if !v.is_boolean() {
                    out.push(violation(path, format!("expected true or false, got {v}")));
                }
            }
            ParamKind::Choice(opts) => match v.as_str() {
                Some(s) if opts.contains(&s) => {}
                Some(s) => {
                    let mut msg = format!("unknown option \"{s}\", expected one of {}", opts.join(", "));
                    if let Some(best) = suggest(s, opts.iter().copied()) {
                        msg.push_str(&format!("; did you mean \"{best}\"?"));
                    }
                    out.push(violation(path, msg));
                }
                None => out.push(violation(path, format!("expected a string, got {v}"))),
            },
            ParamKind::NumberList | ParamKind::IntegerList => match v.as_array() {
                Some(items) if items.is_empty() => out.push(violation(path, "must not be empty".into())),
                Some(items) => {
                    let integer = self.kind == ParamKind::IntegerList;
                    for (i, item) in items.iter().enumerate() {
                        self.check_scalar(item, integer, &format!("{path}[{i}]"), out);
                    }
                }
                None => out.push(violation(path, format!("expected an array, got {v}"))),
            },
        }
    }
}

pub(crate) fn violation(path: &str, message: String) -> ConfigViolation {
    ConfigViolation { path: path.to_owned(), message }
}

/// Closest known name to `given`, if any is reasonably similar.
pub(crate) fn suggest<'a>(given: &str, known: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    known
        .map(|k| (k, strsim::jaro_winkler(given, k)))
        .filter(|(_, s)| *s >= 0.75)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
}

/// Parameter values after validation, with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<String, Value>,
}

impl Params {
    /// Validates `raw` against `specs`, appending every problem to `out`.
    pub(crate) fn validate(raw: &Map<String, Value>, specs: &[ParamSpec], out: &mut Vec<ConfigViolation>) -> Self {
        let mut values = BTreeMap::new();
        for key in raw.keys() {
            if !specs.iter().any(|s| s.name == key) {
                let mut msg = "unknown parameter".to_owned();
                if let Some(best) = suggest(key, specs.iter().map(|s| s.name)) {
                    msg.push_str(&format!("; did you mean \"{best}\"?"));
                }
                out.push(violation(&format!("parameters.{key}"), msg));
            }
        }
        for spec in specs {
            let path = format!("parameters.{}", spec.name);
            match (raw.get(spec.name), &spec.default) {
                (Some(v), _) => {
                    spec.check(v, &path, out);
                    values.insert(spec.name.to_owned(), v.clone());
                }
                (None, Some(d)) => {
                    values.insert(spec.name.to_owned(), d.clone());
                }
                (None, None) => out.push(violation(&path, "required parameter is missing".into())),
            }
        }
        Self { values }
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.values.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
    }

    fn get(&self, name: &str) -> Result<&Value> {
        self.values.get(name).ok_or_else(|| Error::Undefined(format!("parameter {name}")))
    }

    fn typed<T>(&self, name: &str, what: &str, f: impl FnOnce(&Value) -> Option<T>) -> Result<T> {
        f(self.get(name)?).ok_or_else(|| Error::Argument(format!("parameter {name} is not {what}")))
    }

    pub fn f64(&self, name: &str) -> Result<f64> {
        self.typed(name, "a number", Value::as_f64)
    }

    pub fn usize(&self, name: &str) -> Result<usize> {
        self.typed(name, "an integer", |v| v.as_u64().and_then(|u| usize::try_from(u).ok()))
    }

    pub fn bool(&self, name: &str) -> Result<bool> {
        self.typed(name, "a boolean", Value::as_bool)
    }

    pub fn str(&self, name: &str) -> Result<&str> {
        self.get(name)?.as_str().ok_or_else(|| Error::Argument(format!("parameter {name} is not a string")))
    }

    pub fn f64s(&self, name: &str) -> Result<Vec<f64>> {
        self.typed(name, "a number list", |v| v.as_array()?.iter().map(Value::as_f64).collect())
    }

    pub fn usizes(&self, name: &str) -> Result<Vec<usize>> {
        self.typed(name, "an integer list", |v| {
            v.as_array()?.iter().map(|x| x.as_u64().and_then(|u| usize::try_from(u).ok())).collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn specs() -> Vec<ParamSpec> {
        vec![
            ParamSpec::number("omega0", "splitting").positive(),
            ParamSpec::numbers("tau", "spacings").positive(),
            ParamSpec::integer("n", "pulses").default(8).at_least(2.0),
            ParamSpec::choice("mode", &["slope", "variance"], "bias").default("slope"),
        ]
    }

    fn run(raw: Value) -> (Params, Vec<ConfigViolation>) {
        let mut out = Vec::new();
        let p = Params::validate(raw.as_object().unwrap(), &specs(), &mut out);
        (p, out)
    }

    #[test]
    fn defaults_fill_in() {
        let (p, out) = run(json!({"omega0": 2.0, "tau": [1.0]}));
        assert!(out.is_empty(), "{out:?}");
        assert_eq!(p.usize("n").unwrap(), 8);
        assert_eq!(p.str("mode").unwrap(), "slope");
    }

    #[test]
    fn collects_every_violation_with_paths() {
        let (_, out) = run(json!({"omega_zero": 1.0, "tau": [1.0, 2.0, -1.0], "n": 1.5, "mode": "slop"}));
        let paths: Vec<&str> = out.iter().map(|v| v.path.as_str()).collect();
        assert!(paths.contains(&"parameters.omega_zero"));
        assert!(paths.contains(&"parameters.omega0"));
        assert!(paths.contains(&"parameters.tau[2]"));
        assert!(paths.contains(&"parameters.n"));
        assert!(paths.contains(&"parameters.mode"));
        let unknown = out.iter().find(|v| v.path == "parameters.omega_zero").unwrap();
        assert!(unknown.message.contains("\"omega0\""), "{}", unknown.message);
    }

    #[test]
    fn negative_integers_are_rejected() {
        let (_, out) = run(json!({"omega0": 1.0, "tau": [1.0], "n": -4}));
        assert_eq!(out.len(), 1);
        assert!(out[0].message.contains("non-negative"));
    }
}
