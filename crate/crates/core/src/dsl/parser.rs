use std::collections::BTreeSet;

use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, SourceSpan};
use crate::duration::{parse_duration, Deadline, Duration};
use crate::expr::{BinaryOp, Expr, Function, UnaryOp, Value};
use crate::model::{Event, EventId, EventKind, Graph, Label, Marking, Relation, RelationKind};

/// Words with a fixed meaning inside expressions; they cannot name events.
pub(crate) const RESERVED: [&str; 6] = ["and", "or", "not", "true", "false", "undefined"];

const MAX_DEPTH: usize = 200;

const RELATION_KEYWORDS: [&str; 7] = [
    "condition",
    "response",
    "milestone",
    "include",
    "exclude",
    "cancel",
    "value",
];

pub(crate) struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    file: &'a str,
    depth: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &str, file: &'a str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(src, file)?,
            pos: 0,
            file,
            depth: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, token: &Token, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError {
            span: SourceSpan {
                file: self.file.to_string(),
                line: token.line,
                column: token.column,
            },
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let token = self.peek();
        let message = format!(
            "unexpected {}, expected {}",
            token.tok.describe(),
            expected.join(" or ")
        );
        self.error_at(token, message, expected)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&[kw]))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&[tok.symbol()]))
        }
    }

    fn ident(&mut self) -> Result<(String, Token), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.advance()))
            }
            _ => Err(self.unexpected(&["IDENT"])),
        }
    }

    fn event_id(&mut self) -> Result<EventId, ParseError> {
        let (name, token) = self.ident()?;
        if RESERVED.contains(&name.as_str()) {
            return Err(self.error_at(&token, format!("`{name}` is reserved and cannot name an event"), &["IDENT"]));
        }
        EventId::new(name).map_err(|e| self.error_at(&token, e.to_string(), &["IDENT"]))
    }

    fn duration(&mut self) -> Result<Duration, ParseError> {
        let token = self.peek().clone();
        match &token.tok {
            Tok::Ident(s) if s.starts_with('P') => {
                let d = parse_duration(s).map_err(|e| self.error_at(&token, e.to_string(), &["DUR"]))?;
                self.advance();
                Ok(d)
            }
            _ => Err(self.unexpected(&["DUR"])),
        }
    }

    fn at_duration(&self) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s.starts_with('P') && s.len() > 1 && s.as_bytes()[1].is_ascii_digit() || s.starts_with("PT"))
    }

    pub(crate) fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input"]))
        }
    }

    pub(crate) fn graph(&mut self) -> Result<Graph, ParseError> {
        self.expect_keyword("graph")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut roles = Vec::new();
        let mut events = Vec::new();
        let mut relations = Vec::new();
        let mut marking = Marking::default();
        loop {
            if self.eat(&Tok::RBrace) {
                break;
            }
            let kw = match &self.peek().tok {
                Tok::Ident(s) => s.clone(),
                _ => return Err(self.unexpected(&["roles", "event", "a relation keyword", "}"])),
            };
            match kw.as_str() {
                "roles" => {
                    self.advance();
                    roles.extend(self.ident_list()?);
                    self.expect(Tok::Semi)?;
                }
                "event" => {
                    self.advance();
                    events.push(self.event_decl(&mut marking)?);
                }
                k if RELATION_KEYWORDS.contains(&k) => {
                    self.advance();
                    relations.push(self.relation_decl(k)?);
                }
                _ => return Err(self.unexpected(&["roles", "event", "a relation keyword", "}"])),
            }
        }
        self.expect_eof()?;
        Ok(Graph::new(name, roles, events, relations, marking))
    }

    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.ident()?.0];
        while self.eat(&Tok::Comma) {
            out.push(self.ident()?.0);
        }
        Ok(out)
    }

    fn event_decl(&mut self, marking: &mut Marking) -> Result<Event, ParseError> {
        let id = self.event_id()?;
        let action = match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.advance();
                s
            }
            _ => id.to_string(),
        };
        let kind = if self.eat_keyword("input") {
            EventKind::Input
        } else if self.eat_keyword("compute") {
            self.expect(Tok::LParen)?;
            let expr = self.expr()?;
            self.expect(Tok::RParen)?;
            EventKind::Computation(expr)
        } else {
            EventKind::Simple
        };

        let mut label_roles = BTreeSet::new();
        if self.eat_keyword("roles") {
            self.expect(Tok::LBracket)?;
            label_roles.extend(self.ident_list()?);
            self.expect(Tok::RBracket)?;
        }
        // Flags describe this event's part of the initial marking; a repeated
        // declaration replaces it.
        marking.included.insert(id.clone());
        marking.executed.remove(&id);
        marking.required.remove(&id);
        marking.values.remove(&id);
        if self.eat_keyword("excluded") {
            marking.included.remove(&id);
        }
        if self.eat_keyword("executed") {
            let age = if self.at_duration() { self.duration()?.steps() } else { 0 };
            marking.executed.insert(id.clone(), age);
        }
        if self.eat_keyword("pending") {
            let deadline = if self.at_duration() {
                Deadline::Finite(self.duration()?.steps())
            } else {
                Deadline::Infinity
            };
            marking.required.insert(id.clone(), deadline);
        }
        if self.eat_keyword("value") {
            let token = self.peek().clone();
            let value = self.literal()?;
            if !value.is_defined() {
                return Err(self.error_at(&token, "initial value cannot be undefined", &["literal"]));
            }
            marking.set_value(&id, value);
        }
        let parent = if self.eat_keyword("in") {
            Some(self.event_id()?)
        } else {
            None
        };
        if self.peek().tok != Tok::Semi {
            return Err(self.unexpected(&[
                "input", "compute", "roles", "excluded", "executed", "pending", "value", "in", ";",
            ]));
        }
        self.advance();
        Ok(Event {
            id,
            label: Label {
                action,
                roles: label_roles,
            },
            kind,
            parent,
        })
    }

    fn literal(&mut self) -> Result<Value, ParseError> {
        let token = self.peek().clone();
        match &token.tok {
            Tok::Int(digits) => {
                self.advance();
                self.int_value(digits, false, &token).map(Value::Int)
            }
            Tok::Minus => {
                self.advance();
                match &self.peek().tok.clone() {
                    Tok::Int(digits) => {
                        let t = self.advance();
                        self.int_value(digits, true, &t).map(Value::Int)
                    }
                    _ => Err(self.unexpected(&["INT"])),
                }
            }
            Tok::Str(s) => {
                let s = s.clone();
                self.advance();
                Ok(Value::Text(s))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                let b = s == "true";
                self.advance();
                Ok(Value::Bool(b))
            }
            Tok::Ident(s) if s == "undefined" => {
                self.advance();
                Ok(Value::Undefined)
            }
            _ => Err(self.unexpected(&["INT", "STRING", "true", "false"])),
        }
    }

    fn int_value(&self, digits: &str, negative: bool, token: &Token) -> Result<i64, ParseError> {
        let out_of_range = || self.error_at(token, "integer literal out of range", &["INT"]);
        let magnitude: u64 = digits.parse().map_err(|_| out_of_range())?;
        if negative {
            if magnitude == 1u64 << 63 {
                Ok(i64::MIN)
            } else {
                i64::try_from(magnitude).map(|v| -v).map_err(|_| out_of_range())
            }
        } else {
            i64::try_from(magnitude).map_err(|_| out_of_range())
        }
    }

    fn relation_decl(&mut self, keyword: &str) -> Result<Relation, ParseError> {
        let source = self.event_id()?;
        self.expect(Tok::Arrow)?;
        let target = self.event_id()?;
        let mut kind = match keyword {
            "condition" => RelationKind::condition(),
            "response" => RelationKind::response(),
            "milestone" => RelationKind::Milestone,
            "include" => RelationKind::Include,
            "exclude" => RelationKind::Exclude,
            "cancel" => RelationKind::Cancel,
            _ => RelationKind::Value,
        };
        if self.is_keyword("delay") {
            let token = self.advance();
            let delay = self.duration()?;
            match &mut kind {
                RelationKind::Condition { delay: d } => *d = delay,
                _ => return Err(self.error_at(&token, "only condition relations take a delay", &[";"])),
            }
        }
        if self.is_keyword("deadline") {
            let token = self.advance();
            let deadline = self.duration()?;
            match &mut kind {
                RelationKind::Response { deadline: d } => *d = Deadline::Finite(deadline.steps()),
                _ => {
                    return Err(self.error_at(&token, "only response relations take a deadline", &[";"]))
                }
            }
        }
        let guard = if self.eat_keyword("guard") {
            self.expect(Tok::LParen)?;
            let expr = self.expr()?;
            self.expect(Tok::RParen)?;
            Some(expr)
        } else {
            None
        };
        if self.peek().tok != Tok::Semi {
            return Err(self.unexpected(&["delay", "deadline", "guard", ";"]));
        }
        self.advance();
        Ok(Relation {
            kind,
            source,
            target,
            guard,
        })
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let token = self.peek().clone();
            return Err(self.error_at(&token, "expression nested too deeply", &[]));
        }
        let result = self.binary_level(1);
        self.depth -= 1;
        result
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match &self.peek().tok {
            Tok::Ident(s) if s == "or" => BinaryOp::Or,
            Tok::Ident(s) if s == "and" => BinaryOp::And,
            Tok::Eq => BinaryOp::Eq,
            Tok::Ne => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            Tok::Slash => BinaryOp::Div,
            _ => return None,
        })
    }

    fn binary_level(&mut self, level: u8) -> Result<Expr, ParseError> {
        if level > 5 {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        while let Some(op) = self.binary_op().filter(|op| op.precedence() == level) {
            self.advance();
            let rhs = self.binary_level(level + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let token = self.peek().clone();
            return Err(self.error_at(&token, "expression nested too deeply", &[]));
        }
        let result = self.unary_inner();
        self.depth -= 1;
        result
    }

    fn unary_inner(&mut self) -> Result<Expr, ParseError> {
        if self.eat_keyword("not") {
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(self.unary()?)));
        }
        if self.peek().tok == Tok::Minus {
            let minus = self.peek().clone();
            if let Tok::Int(_) = self.peek_at(1) {
                let next = &self.tokens[self.pos + 1];
                if next.start == minus.end {
                    return self.literal().map(Expr::Literal);
                }
            }
            self.advance();
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let token = self.peek().clone();
        match &token.tok {
            Tok::Int(_) | Tok::Str(_) => self.literal().map(Expr::Literal),
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if matches!(s.as_str(), "true" | "false" | "undefined") => {
                self.literal().map(Expr::Literal)
            }
            Tok::Ident(s) if self.peek_at(1) == &Tok::LParen => {
                let func = Function::from_name(s)
                    .ok_or_else(|| self.error_at(&token, format!("unknown function `{s}`"), &["hash"]))?;
                self.advance();
                self.advance();
                let mut args = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        args.push(self.expr()?);
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
                Ok(Expr::Call(func, args))
            }
            Tok::Ident(_) => Ok(Expr::EventRef(self.event_id()?)),
            _ => Err(self.unexpected(&["expression"])),
        }
    }
}
