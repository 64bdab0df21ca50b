use std::fmt;

use super::{BinaryOp, Expr, UnaryOp, Value};
use crate::model::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    UnknownEvent,
    Arity,
    Type,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Statically known result type. `Any` covers event references and
/// anything else only known at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StaticType {
    Int,
    Bool,
    Text,
    Any,
}

impl StaticType {
    fn name(self) -> &'static str {
        match self {
            StaticType::Int => "int",
            StaticType::Bool => "bool",
            StaticType::Text => "text",
            StaticType::Any => "any",
        }
    }

    fn conflicts_with(self, expected: StaticType) -> bool {
        self != StaticType::Any && expected != StaticType::Any && self != expected
    }
}

/// Flags unknown event references, wrong call arity and operand types that
/// can never work.
pub fn static_check(expr: &Expr, graph: &Graph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    infer(expr, graph, &mut out);
    out
}

pub(crate) fn infer_type(expr: &Expr, graph: &Graph) -> StaticType {
    infer(expr, graph, &mut Vec::new())
}

fn infer(expr: &Expr, graph: &Graph, out: &mut Vec<Diagnostic>) -> StaticType {
    let type_error = |out: &mut Vec<Diagnostic>, message: String| {
        out.push(Diagnostic {
            kind: DiagnosticKind::Type,
            message,
        })
    };
    match expr {
        Expr::Literal(Value::Int(_)) => StaticType::Int,
        Expr::Literal(Value::Bool(_)) => StaticType::Bool,
        Expr::Literal(Value::Text(_)) => StaticType::Text,
        Expr::Literal(Value::Undefined) => StaticType::Any,
        Expr::EventRef(id) => {
            if graph.event(id).is_none() {
                out.push(Diagnostic {
                    kind: DiagnosticKind::UnknownEvent,
                    message: format!("unknown event `{id}` in expression"),
                });
            }
            StaticType::Any
        }
        Expr::Unary(op, operand) => {
            let t = infer(operand, graph, out);
            let expected = match op {
                UnaryOp::Not => StaticType::Bool,
                UnaryOp::Neg => StaticType::Int,
            };
            if t.conflicts_with(expected) {
                type_error(
                    out,
                    format!("`{expr}`: operand is {} but {} is required", t.name(), expected.name()),
                );
            }
            expected
        }
        Expr::Binary(op, lhs, rhs) => {
            let lt = infer(lhs, graph, out);
            let rt = infer(rhs, graph, out);
            if op.is_arithmetic() || op.is_logical() {
                let expected = if op.is_arithmetic() {
                    StaticType::Int
                } else {
                    StaticType::Bool
                };
                for t in [lt, rt] {
                    if t.conflicts_with(expected) {
                        type_error(
                            out,
                            format!(
                                "`{expr}`: {} operand where {} is required",
                                t.name(),
                                expected.name()
                            ),
                        );
                    }
                }
                expected
            } else {
                let ordered = !matches!(op, BinaryOp::Eq | BinaryOp::Ne);
                if ordered && lt.conflicts_with(rt) {
                    type_error(
                        out,
                        format!("`{expr}`: cannot order {} against {}", lt.name(), rt.name()),
                    );
                }
                StaticType::Bool
            }
        }
        Expr::Call(func, args) => {
            if args.len() != func.arity() {
                out.push(Diagnostic {
                    kind: DiagnosticKind::Arity,
                    message: format!(
                        "arity: {} takes {} argument(s), got {}",
                        func.name(),
                        func.arity(),
                        args.len()
                    ),
                });
            }
            for arg in args {
                infer(arg, graph, out);
            }
            StaticType::Text
        }
    }
}
