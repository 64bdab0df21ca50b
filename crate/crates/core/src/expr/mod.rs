//! Guard and computation expressions over event values.

mod check;
mod eval;
mod hash;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::EventId;

pub use check::{static_check, Diagnostic, DiagnosticKind};
pub use eval::{eval, eval_guard, EvalError, GuardOutcome, ValueSource};
pub use hash::fnv1a_hex;

/// Whether a guard could evaluate to a boolean at all.
pub(crate) fn infer_guard_type_is_bool(expr: &Expr, graph: &crate::model::Graph) -> bool {
    matches!(
        check::infer_type(expr, graph),
        check::StaticType::Bool | check::StaticType::Any
    )
}

/// Dynamic value carried by events.
///
/// Structural equality (`PartialEq`) treats two `Undefined`s as equal so that
/// markings compare sensibly; the expression operator `=` does not.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Text(String),
    #[default]
    Undefined,
}

impl Value {
    pub fn is_defined(&self) -> bool {
        !matches!(self, Value::Undefined)
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Text(_) => "text",
            Value::Undefined => "undefined",
        }
    }

    /// JSON form: numbers, booleans, strings, and `null` for `Undefined`.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Int(i) => serde_json::Value::from(*i),
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Text(s) => serde_json::Value::String(s.clone()),
            Value::Undefined => serde_json::Value::Null,
        }
    }

    pub fn from_json(json: &serde_json::Value) -> Option<Value> {
        match json {
            serde_json::Value::Null => Some(Value::Undefined),
            serde_json::Value::Bool(b) => Some(Value::Bool(*b)),
            serde_json::Value::Number(n) => n.as_i64().map(Value::Int),
            serde_json::Value::String(s) => Some(Value::Text(s.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => write_quoted(f, s),
            Value::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = serde_json::Value::deserialize(deserializer)?;
        Value::from_json(&json).ok_or_else(|| {
            serde::de::Error::custom("value must be null, a boolean, a 64-bit integer or a string")
        })
    }
}

/// Writes `s` as a double-quoted literal with escapes the DSL lexer accepts.
pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for ch in s.chars() {
        match ch {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c if c.is_control() => write!(f, "\\u{{{:x}}}", c as u32)?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }

    /// Binding strength; higher binds tighter. All levels are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq
            | BinaryOp::Ne
            | BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div => 5,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::And | BinaryOp::Or)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Function {
    Hash,
}

impl Function {
    pub fn name(self) -> &'static str {
        match self {
            Function::Hash => "hash",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Function::Hash => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Function> {
        match name {
            "hash" => Some(Function::Hash),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Literal(Value),
    EventRef(EventId),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Function, Vec<Expr>),
}

impl Expr {
    pub fn int(i: i64) -> Expr {
        Expr::Literal(Value::Int(i))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Literal(Value::Bool(b))
    }

    pub fn text(s: impl Into<String>) -> Expr {
        Expr::Literal(Value::Text(s.into()))
    }

    pub fn event(id: &EventId) -> Expr {
        Expr::EventRef(id.clone())
    }

    pub fn negate(e: Expr) -> Expr {
        Expr::Unary(UnaryOp::Not, Box::new(e))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn hash(arg: Expr) -> Expr {
        Expr::Call(Function::Hash, vec![arg])
    }

    /// Every event referenced anywhere in the tree, in visit order.
    pub fn event_refs(&self) -> Vec<&EventId> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a EventId>) {
        match self {
            Expr::Literal(_) => {}
            Expr::EventRef(id) => out.push(id),
            Expr::Unary(_, e) => e.collect_refs(out),
            Expr::Binary(_, l, r) => {
                l.collect_refs(out);
                r.collect_refs(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_refs(out)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(..) => 6,
            _ => 7,
        }
    }
}

/// Canonical surface syntax, minimally parenthesised.
///
/// The parser folds `-` directly followed by digits into a negative literal,
/// so negation of a literal is printed as `-(5)` to keep the two apart.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(v) => write!(f, "{v}"),
            Expr::EventRef(id) => write!(f, "{id}"),
            Expr::Unary(op, operand) => {
                let wrap = match op {
                    UnaryOp::Not => operand.precedence() < 6,
                    UnaryOp::Neg => {
                        operand.precedence() < 6 || matches!(**operand, Expr::Literal(Value::Int(_)))
                    }
                };
                match op {
                    UnaryOp::Not => f.write_str("not ")?,
                    UnaryOp::Neg => f.write_str("-")?,
                }
                if wrap {
                    write!(f, "({operand})")
                } else {
                    write!(f, "{operand}")
                }
            }
            Expr::Binary(op, lhs, rhs) => {
                let prec = op.precedence();
                if lhs.precedence() < prec {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if rhs.precedence() <= prec {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> EventId {
        EventId::new(s).unwrap()
    }

    #[test]
    fn display_parenthesises_by_precedence() {
        let e = Expr::binary(
            BinaryOp::Mul,
            Expr::binary(BinaryOp::Add, Expr::int(1), Expr::int(2)),
            Expr::int(3),
        );
        assert_eq!(e.to_string(), "(1 + 2) * 3");
        let e = Expr::binary(
            BinaryOp::Sub,
            Expr::int(1),
            Expr::binary(BinaryOp::Sub, Expr::int(2), Expr::int(3)),
        );
        assert_eq!(e.to_string(), "1 - (2 - 3)");
        let e = Expr::binary(
            BinaryOp::Eq,
            Expr::event(&id("commit")),
            Expr::hash(Expr::event(&id("reveal"))),
        );
        assert_eq!(e.to_string(), "commit = hash(reveal)");
    }

    #[test]
    fn display_keeps_negation_and_negative_literals_apart() {
        assert_eq!(Expr::int(-5).to_string(), "-5");
        assert_eq!(Expr::Unary(UnaryOp::Neg, Box::new(Expr::int(5))).to_string(), "-(5)");
        assert_eq!(Expr::negate(Expr::event(&id("decide"))).to_string(), "not decide");
    }

    #[test]
    fn text_escapes() {
        assert_eq!(Value::Text("a\"b\\\n".into()).to_string(), r#""a\"b\\\n""#);
    }
}
