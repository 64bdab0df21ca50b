//! Textual authoring format for graphs.

mod lexer;
mod parser;
mod writer;

use std::fmt;

use serde::Serialize;

use crate::expr::Expr;
use crate::model::Graph;

pub(crate) use parser::RESERVED;
pub use writer::serialize_graph;

const DEFAULT_FILE: &str = "<input>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    parse_graph_named(text, DEFAULT_FILE)
}

/// Like [`parse_graph`], reporting `file` in error spans.
pub fn parse_graph_named(text: &str, file: &str) -> Result<Graph, ParseError> {
    parser::Parser::new(text, file)?.graph()
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = parser::Parser::new(text, DEFAULT_FILE)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}
