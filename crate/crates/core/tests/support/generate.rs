//! Random graphs, expressions and markings for property tests.

use std::collections::BTreeSet;

use dcr_core::expr::{BinaryOp, Function, UnaryOp};
use dcr_core::{Deadline, Duration, Event, EventId, EventKind, Expr, Graph, Label, Marking, Relation, RelationKind, Value};
use rand::seq::SliceRandom;
use rand::Rng;

pub const ROLES: [&str; 3] = ["alice", "bob", "carol"];

pub struct Shape {
    pub max_events: usize,
    pub max_relations: usize,
    /// Attach random guards and computations instead of constant-true guards.
    pub data: bool,
}

pub fn id(i: usize) -> EventId {
    EventId::new(format!("e{i}")).unwrap()
}

fn deadline(rng: &mut impl Rng) -> Deadline {
    if rng.gen_bool(0.3) {
        Deadline::Infinity
    } else {
        Deadline::Finite(rng.gen_range(0..6))
    }
}

pub fn value(rng: &mut impl Rng) -> Value {
    match rng.gen_range(0..4) {
        0 => Value::Bool(rng.gen()),
        1 => Value::Text(text(rng)),
        _ => Value::Int(rng.gen_range(-20..20)),
    }
}

fn text(rng: &mut impl Rng) -> String {
    const PIECES: [&str; 10] = ["a", "Z", " ", "\"", "\\", "\n", "\t", "é", "\u{1}", "42"];
    (0..rng.gen_range(0..5))
        .map(|_| *PIECES.choose(rng).unwrap())
        .collect()
}

pub fn expr(rng: &mut impl Rng, events: usize, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..6) {
            0 if events > 0 => Expr::EventRef(id(rng.gen_range(0..events))),
            1 => Expr::Literal(Value::Undefined),
            2 => Expr::Literal(Value::Int(*[i64::MIN, i64::MAX, -1, 0].choose(rng).unwrap())),
            _ => Expr::Literal(value(rng)),
        };
    }
    match rng.gen_range(0..5) {
        0 => Expr::Unary(
            *[UnaryOp::Not, UnaryOp::Neg].choose(rng).unwrap(),
            Box::new(expr(rng, events, depth - 1)),
        ),
        1 => Expr::Call(Function::Hash, vec![expr(rng, events, depth - 1)]),
        _ => {
            const OPS: [BinaryOp; 12] = [
                BinaryOp::Add,
                BinaryOp::Sub,
                BinaryOp::Mul,
                BinaryOp::Div,
                BinaryOp::Eq,
                BinaryOp::Ne,
                BinaryOp::Lt,
                BinaryOp::Le,
                BinaryOp::Gt,
                BinaryOp::Ge,
                BinaryOp::And,
                BinaryOp::Or,
            ];
            Expr::binary(
                *OPS.choose(rng).unwrap(),
                expr(rng, events, depth - 1),
                expr(rng, events, depth - 1),
            )
        }
    }
}

pub fn graph(rng: &mut impl Rng, shape: &Shape) -> Graph {
    let n = rng.gen_range(1..=shape.max_events);
    let mut events = Vec::with_capacity(n);
    let mut marking = Marking::default();
    for i in 0..n {
        let kind = match rng.gen_range(0..6) {
            0 => EventKind::Input,
            1 if shape.data => EventKind::Computation(expr(rng, n, 3)),
            1 => EventKind::Computation(Expr::binary(
                BinaryOp::Add,
                Expr::Literal(Value::Int(1)),
                Expr::Literal(Value::Int(rng.gen_range(0..9))),
            )),
            _ => EventKind::Simple,
        };
        let roles: BTreeSet<String> = ROLES
            .iter()
            .filter(|_| rng.gen_bool(0.25))
            .map(|r| r.to_string())
            .collect();
        let action = if rng.gen_bool(0.2) { text(rng) } else { format!("e{i}") };
        // Parents only point backwards, so nesting is acyclic.
        let parent = (i > 0 && rng.gen_bool(0.25)).then(|| id(rng.gen_range(0..i)));
        let eid = id(i);
        if rng.gen_bool(0.8) {
            marking.included.insert(eid.clone());
        }
        if rng.gen_bool(0.3) {
            marking.executed.insert(eid.clone(), rng.gen_range(0..4));
        }
        if rng.gen_bool(0.3) {
            marking.required.insert(eid.clone(), deadline(rng));
        }
        if rng.gen_bool(0.3) {
            marking.set_value(&eid, value(rng));
        }
        events.push(Event {
            id: eid,
            label: Label { action, roles },
            kind,
            parent,
        });
    }
    let m = rng.gen_range(0..=shape.max_relations);
    let relations = (0..m)
        .map(|_| {
            let kind = match rng.gen_range(0..7) {
                0 => RelationKind::Condition {
                    delay: Duration::from_steps(if rng.gen_bool(0.5) { 0 } else { rng.gen_range(1..4) }),
                },
                1 => RelationKind::Response { deadline: deadline(rng) },
                2 => RelationKind::Milestone,
                3 => RelationKind::Include,
                4 => RelationKind::Exclude,
                5 => RelationKind::Cancel,
                _ => RelationKind::Value,
            };
            Relation {
                kind,
                source: id(rng.gen_range(0..n)),
                target: id(rng.gen_range(0..n)),
                guard: (shape.data && rng.gen_bool(0.4)).then(|| expr(rng, n, 3)),
            }
        })
        .collect();
    let declared = if rng.gen_bool(0.5) {
        ROLES.iter().map(|r| r.to_string()).collect()
    } else {
        Vec::new()
    };
    Graph::new(format!("g{}", rng.gen_range(0..1000)), declared, events, relations, marking)
}
