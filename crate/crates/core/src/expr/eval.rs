use super::{fnv1a_hex, BinaryOp, Expr, Function, UnaryOp, Value};
use crate::model::EventId;

/// Where `EventRef`s get their values from.
pub trait ValueSource {
    /// `Ok(None)` for a known event without a value, `Err` for an unknown id.
    fn value_of(&self, id: &EventId) -> Result<Option<&Value>, EvalError>;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown event {0}")]
    UnknownEvent(EventId),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("type error: {0}")]
    Type(String),
    #[error("{func} expects {expected} argument(s), got {got}")]
    Arity {
        func: &'static str,
        expected: usize,
        got: usize,
    },
}

pub fn eval(expr: &Expr, scope: &impl ValueSource) -> Result<Value, EvalError> {
    match expr {
        Expr::Literal(v) => Ok(v.clone()),
        Expr::EventRef(id) => Ok(scope.value_of(id)?.cloned().unwrap_or(Value::Undefined)),
        Expr::Unary(op, operand) => match (op, eval(operand, scope)?) {
            (_, Value::Undefined) => Ok(Value::Undefined),
            (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
            (UnaryOp::Neg, Value::Int(i)) => i
                .checked_neg()
                .map(Value::Int)
                .ok_or(EvalError::Overflow("negation")),
            (op, v) => Err(EvalError::Type(format!(
                "cannot apply {} to {}",
                match op {
                    UnaryOp::Not => "not",
                    UnaryOp::Neg => "-",
                },
                v.type_name()
            ))),
        },
        Expr::Binary(op, lhs, rhs) if op.is_logical() => eval_logical(*op, lhs, rhs, scope),
        Expr::Binary(op, lhs, rhs) => {
            let l = eval(lhs, scope)?;
            let r = eval(rhs, scope)?;
            apply_binary(*op, l, r)
        }
        Expr::Call(func, args) => {
            if args.len() != func.arity() {
                return Err(EvalError::Arity {
                    func: func.name(),
                    expected: func.arity(),
                    got: args.len(),
                });
            }
            match func {
                Function::Hash => {
                    let v = eval(&args[0], scope)?;
                    Ok(fnv1a_hex(&v).map(Value::Text).unwrap_or(Value::Undefined))
                }
            }
        }
    }
}

fn eval_logical(
    op: BinaryOp,
    lhs: &Expr,
    rhs: &Expr,
    scope: &impl ValueSource,
) -> Result<Value, EvalError> {
    let short = op == BinaryOp::Or;
    match eval(lhs, scope)? {
        Value::Bool(b) if b == short => Ok(Value::Bool(short)),
        Value::Bool(_) => match eval(rhs, scope)? {
            v @ (Value::Bool(_) | Value::Undefined) => Ok(v),
            v => Err(EvalError::Type(format!(
                "{} expects bool operands, got {}",
                op.symbol(),
                v.type_name()
            ))),
        },
        Value::Undefined => Ok(Value::Undefined),
        v => Err(EvalError::Type(format!(
            "{} expects bool operands, got {}",
            op.symbol(),
            v.type_name()
        ))),
    }
}

fn apply_binary(op: BinaryOp, l: Value, r: Value) -> Result<Value, EvalError> {
    use std::cmp::Ordering;

    if !l.is_defined() || !r.is_defined() {
        return Ok(Value::Undefined);
    }
    if op.is_arithmetic() {
        let (Value::Int(a), Value::Int(b)) = (&l, &r) else {
            return Err(EvalError::Type(format!(
                "{} expects int operands, got {} and {}",
                op.symbol(),
                l.type_name(),
                r.type_name()
            )));
        };
        let (a, b) = (*a, *b);
        let result = match op {
            BinaryOp::Add => a.checked_add(b).ok_or(EvalError::Overflow("addition"))?,
            BinaryOp::Sub => a.checked_sub(b).ok_or(EvalError::Overflow("subtraction"))?,
            BinaryOp::Mul => a.checked_mul(b).ok_or(EvalError::Overflow("multiplication"))?,
            BinaryOp::Div => {
                if b == 0 {
                    return Err(EvalError::DivisionByZero);
                }
                a.checked_div(b).ok_or(EvalError::Overflow("division"))?
            }
            _ => unreachable!(),
        };
        return Ok(Value::Int(result));
    }

    let ordering = match (&l, &r) {
        (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
        (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
        (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
        _ => None,
    };
    let result = match (op, ordering) {
        (BinaryOp::Eq, ord) => ord == Some(Ordering::Equal),
        (BinaryOp::Ne, ord) => ord != Some(Ordering::Equal),
        (_, None) => {
            return Err(EvalError::Type(format!(
                "cannot compare {} with {}",
                l.type_name(),
                r.type_name()
            )))
        }
        (BinaryOp::Lt, Some(o)) => o == Ordering::Less,
        (BinaryOp::Le, Some(o)) => o != Ordering::Greater,
        (BinaryOp::Gt, Some(o)) => o == Ordering::Greater,
        (BinaryOp::Ge, Some(o)) => o != Ordering::Less,
        _ => unreachable!(),
    };
    Ok(Value::Bool(result))
}

/// Result of evaluating a guard, with the reason when it was coerced to false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardOutcome {
    pub holds: bool,
    pub diagnostic: Option<String>,
}

/// Absent guards hold. Present guards hold only if they evaluate to `true`;
/// `Undefined`, non-boolean results and evaluation errors count as false.
pub fn eval_guard(guard: Option<&Expr>, scope: &impl ValueSource) -> GuardOutcome {
    let Some(expr) = guard else {
        return GuardOutcome {
            holds: true,
            diagnostic: None,
        };
    };
    let (holds, diagnostic) = match eval(expr, scope) {
        Ok(Value::Bool(b)) => (b, None),
        Ok(Value::Undefined) => (false, Some(format!("guard `{expr}` is undefined"))),
        Ok(other) => (
            false,
            Some(format!("guard `{expr}` yielded {} instead of bool", other.type_name())),
        ),
        Err(err) => (false, Some(format!("guard `{expr}` failed: {err}"))),
    };
    GuardOutcome { holds, diagnostic }
}
