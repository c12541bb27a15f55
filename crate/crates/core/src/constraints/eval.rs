use std::collections::BTreeMap;
use std::fmt;

use super::ast::{BinOp, Expr};
use crate::semstore::KnowledgeBase;
use crate::units::{approx_eq, ConverterRegistry, Quantity, DIMENSIONLESS};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Quantity(Quantity),
}

impl Value {
    pub fn number(magnitude: f64) -> Value {
        Value::Quantity(Quantity::dimensionless(magnitude))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Quantity(_) => None,
        }
    }

    pub fn as_quantity(&self) -> Option<&Quantity> {
        match self {
            Value::Quantity(q) => Some(q),
            Value::Bool(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Quantity(q) => write!(f, "{q}"),
        }
    }
}

impl From<Quantity> for Value {
    fn from(q: Quantity) -> Self {
        Value::Quantity(q)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound path {0}")]
    UnboundPath(String),
    #[error("unit mismatch: {0}")]
    UnitMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("type error: {0}")]
    TypeError(String),
}

/// Path bindings plus optional per-path unit restrictions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Environment {
    bindings: BTreeMap<String, Value>,
    expected_units: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct EnvParseError {
    pub line: usize,
    pub message: String,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, path: &str, value: impl Into<Value>) -> &mut Self {
        self.bindings.insert(path.to_string(), value.into());
        self
    }

    pub fn with(mut self, path: &str, value: impl Into<Value>) -> Self {
        self.bind(path, value);
        self
    }

    pub fn expect_unit(&mut self, path: &str, unit: &str) -> &mut Self {
        self.expected_units.insert(path.to_string(), unit.to_string());
        self
    }

    pub fn get(&self, path: &str) -> Option<&Value> {
        self.bindings.get(path)
    }

    pub fn unbind(&mut self, path: &str) -> Option<Value> {
        self.bindings.remove(path)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn expected_units(&self) -> impl Iterator<Item = (&str, &str)> {
        self.expected_units.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// `BIND path magnitude unit` and `EXPECT path unit` lines, tab
    /// separated. `-` or `1` marks a dimensionless magnitude; `true` and
    /// `false` bind booleans.
    pub fn parse(text: &str) -> Result<Environment, EnvParseError> {
        let mut env = Environment::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let e = |m: String| EnvParseError { line, message: m };
            let cols: Vec<&str> = raw.split('\t').collect();
            match cols.as_slice() {
                ["BIND", path, value] | ["BIND", path, value, "-"] if matches!(*value, "true" | "false") => {
                    env.bind(path, *value == "true");
                }
                ["BIND", path, magnitude, unit] => {
                    let m: f64 = magnitude
                        .trim()
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| e(format!("invalid magnitude `{magnitude}`")))?;
                    let unit = if *unit == "-" { DIMENSIONLESS } else { unit };
                    env.bind(path, Quantity::new(m, unit));
                }
                ["EXPECT", path, unit] => {
                    env.expect_unit(path, unit);
                }
                _ => return Err(e(format!("unrecognised record `{raw}`"))),
            }
        }
        Ok(env)
    }
}

/// Evaluates expressions against a converter registry and, optionally, a
/// knowledge base whose thesaurus canonicalizes unit names.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    registry: &'a ConverterRegistry,
    kb: Option<&'a KnowledgeBase>,
}

impl<'a> Evaluator<'a> {
    pub fn new(registry: &'a ConverterRegistry) -> Self {
        Self { registry, kb: None }
    }

    pub fn with_knowledge(mut self, kb: &'a KnowledgeBase) -> Self {
        self.kb = Some(kb);
        self
    }

    pub fn evaluate(&self, expr: &Expr, env: &Environment) -> Result<Value, EvalError> {
        self.evaluate_counted(expr, env).0
    }

    /// Evaluates and also reports how many nodes were visited.
    pub fn evaluate_counted(&self, expr: &Expr, env: &Environment) -> (Result<Value, EvalError>, usize) {
        let mut visits = 0;
        let r = self.eval(expr, env, &mut visits);
        (r, visits)
    }

    fn canonical_unit<'u>(&self, unit: &'u str) -> &'u str
    where
        'a: 'u,
    {
        match self.kb {
            Some(kb) => kb.canonicalize(unit).unwrap_or(unit),
            None => unit,
        }
    }

    fn same_unit(&self, a: &str, b: &str) -> bool {
        a == b || self.canonical_unit(a) == self.canonical_unit(b)
    }

    /// Expresses `q` in `unit`, through the converter graph if needed.
    pub fn convert(&self, q: &Quantity, unit: &str) -> Result<Quantity, EvalError> {
        if q.is_dimensionless() || unit == DIMENSIONLESS || self.same_unit(&q.unit, unit) {
            return Ok(Quantity::new(q.magnitude, unit));
        }
        let from = self.canonical_unit(&q.unit);
        let to = self.canonical_unit(unit);
        let chain = self
            .registry
            .find_chain(&q.unit, unit)
            .or_else(|_| self.registry.find_chain(from, to))
            .map_err(|_| EvalError::UnitMismatch(format!("no conversion from {} to {}", q.unit, unit)))?;
        Ok(Quantity::new(chain.composed.apply(q.magnitude), unit))
    }

    fn eval(&self, e: &Expr, env: &Environment, visits: &mut usize) -> Result<Value, EvalError> {
        *visits += 1;
        match e {
            Expr::Number { value, unit } => Ok(Value::Quantity(Quantity::new(
                *value,
                unit.as_deref().unwrap_or(DIMENSIONLESS),
            ))),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Path(p) => {
                let key = p.join(".");
                env.get(&key).cloned().ok_or(EvalError::UnboundPath(key))
            }
            Expr::Neg(inner) => {
                let q = self.number(self.eval(inner, env, visits)?, "-")?;
                Ok(Value::Quantity(Quantity::new(-q.magnitude, q.unit)))
            }
            Expr::Not(inner) => {
                let b = self.boolean(self.eval(inner, env, visits)?, "not")?;
                Ok(Value::Bool(!b))
            }
            Expr::Binary { op: BinOp::And, lhs, rhs } => {
                if !self.boolean(self.eval(lhs, env, visits)?, "and")? {
                    return Ok(Value::Bool(false));
                }
                Ok(Value::Bool(self.boolean(self.eval(rhs, env, visits)?, "and")?))
            }
            Expr::Binary { op: BinOp::Or, lhs, rhs } => {
                if self.boolean(self.eval(lhs, env, visits)?, "or")? {
                    return Ok(Value::Bool(true));
                }
                Ok(Value::Bool(self.boolean(self.eval(rhs, env, visits)?, "or")?))
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs, env, visits)?;
                let r = self.eval(rhs, env, visits)?;
                if op.is_comparison() {
                    self.compare(*op, l, r).map(Value::Bool)
                } else {
                    self.arith(*op, l, r).map(Value::Quantity)
                }
            }
        }
    }

    fn boolean(&self, v: Value, ctx: &str) -> Result<bool, EvalError> {
        v.as_bool()
            .ok_or_else(|| EvalError::TypeError(format!("`{ctx}` needs a boolean, got {v}")))
    }

    fn number(&self, v: Value, ctx: &str) -> Result<Quantity, EvalError> {
        match v {
            Value::Quantity(q) => Ok(q),
            Value::Bool(b) => Err(EvalError::TypeError(format!("`{ctx}` needs a number, got {b}"))),
        }
    }

    fn compare(&self, op: BinOp, l: Value, r: Value) -> Result<bool, EvalError> {
        let (a, b) = match (l, r) {
            (Value::Bool(a), Value::Bool(b)) => {
                return match op {
                    BinOp::Eq => Ok(a == b),
                    BinOp::Ne => Ok(a != b),
                    _ => Err(EvalError::TypeError(format!("`{}` is not defined on booleans", op.symbol()))),
                }
            }
            (Value::Quantity(a), Value::Quantity(b)) => (a, b),
            _ => {
                return Err(EvalError::TypeError(format!(
                    "`{}` between a boolean and a number",
                    op.symbol()
                )))
            }
        };
        // the right operand is expressed in the left operand's unit
        let b = if a.is_dimensionless() { b } else { self.convert(&b, &a.unit)? };
        let (x, y) = (a.magnitude, b.magnitude);
        Ok(match op {
            BinOp::Eq => approx_eq(x, y),
            BinOp::Ne => !approx_eq(x, y),
            BinOp::Lt => x < y && !approx_eq(x, y),
            BinOp::Le => x < y || approx_eq(x, y),
            BinOp::Gt => x > y && !approx_eq(x, y),
            BinOp::Ge => x > y || approx_eq(x, y),
            _ => unreachable!("not a comparison"),
        })
    }

    fn arith(&self, op: BinOp, l: Value, r: Value) -> Result<Quantity, EvalError> {
        let a = self.number(l, op.symbol())?;
        let b = self.number(r, op.symbol())?;
        let mismatch = || {
            EvalError::UnitMismatch(format!("{} {} {}", a.unit, op.symbol(), b.unit))
        };
        match op {
            BinOp::Add | BinOp::Sub => {
                let unit = if a.is_dimensionless() {
                    b.unit.clone()
                } else if b.is_dimensionless() || self.same_unit(&a.unit, &b.unit) {
                    a.unit.clone()
                } else {
                    return Err(mismatch());
                };
                let m = if op == BinOp::Add {
                    a.magnitude + b.magnitude
                } else {
                    a.magnitude - b.magnitude
                };
                Ok(Quantity::new(m, unit))
            }
            BinOp::Mul => {
                let unit = match (a.is_dimensionless(), b.is_dimensionless()) {
                    (true, _) => b.unit.clone(),
                    (false, true) => a.unit.clone(),
                    (false, false) => return Err(mismatch()),
                };
                Ok(Quantity::new(a.magnitude * b.magnitude, unit))
            }
            BinOp::Div => {
                let unit = if b.is_dimensionless() {
                    a.unit.clone()
                } else if !a.is_dimensionless() && self.same_unit(&a.unit, &b.unit) {
                    DIMENSIONLESS.to_string()
                } else {
                    return Err(mismatch());
                };
                if b.magnitude == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(Quantity::new(a.magnitude / b.magnitude, unit))
            }
            _ => unreachable!("not arithmetic"),
        }
    }
}

pub fn evaluate(expr: &Expr, env: &Environment, registry: &ConverterRegistry) -> Result<Value, EvalError> {
    Evaluator::new(registry).evaluate(expr, env)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    Unbound,
    NotAQuantity,
    NoConversionPath { actual: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub expected_unit: String,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::Unbound => write!(f, "{}: expected {}, but unbound", self.path, self.expected_unit),
            ViolationKind::NotAQuantity => {
                write!(f, "{}: expected {}, but bound to a boolean", self.path, self.expected_unit)
            }
            ViolationKind::NoConversionPath { actual } => write!(
                f,
                "{}: expected {}, bound {}: no conversion path",
                self.path, self.expected_unit, actual
            ),
        }
    }
}

/// Checks every unit restriction of `env`: the bound unit must equal the
/// expected one or be convertible into it.
pub fn validate_bindings(env: &Environment, registry: &ConverterRegistry) -> Vec<Violation> {
    let eval = Evaluator::new(registry);
    let mut out = Vec::new();
    for (path, expected) in env.expected_units() {
        let v = |kind| Violation {
            path: path.to_string(),
            expected_unit: expected.to_string(),
            kind,
        };
        match env.get(path) {
            None => out.push(v(ViolationKind::Unbound)),
            Some(Value::Bool(_)) => out.push(v(ViolationKind::NotAQuantity)),
            Some(Value::Quantity(q)) => {
                if q.unit != expected && (q.is_dimensionless() || eval.convert(q, expected).is_err()) {
                    out.push(v(ViolationKind::NoConversionPath { actual: q.unit.clone() }));
                }
            }
        }
    }
    out
}
