//! Line-oriented recursive-descent parser for plan text.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Expr, Plan, Step};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for SyntaxError {}

/// Maximum list nesting accepted before reporting an error.
const MAX_DEPTH: usize = 32;

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        matches!(self.peek(), None | Some('#'))
    }

    fn expect(&mut self, want: char) -> Result<(), SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.err(format!("expected `{want}`, found end of line"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.pos += 1,
            Some(c) => return Err(self.err(format!("expected {what}, found `{c}`"))),
            None => return Err(self.err(format!("expected {what}, found end of line"))),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn number(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.pos;
        if matches!(self.peek(), Some('-' | '+')) {
            self.pos += 1;
        }
        let digits = |c: &mut Self| {
            let s = c.pos;
            while matches!(c.peek(), Some(d) if d.is_ascii_digit()) {
                c.pos += 1;
            }
            c.pos - s
        };
        let mut n = digits(self);
        if self.peek() == Some('.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.err("malformed number"));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('-' | '+')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return Err(self.err("malformed exponent"));
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Expr::Number(x)),
            _ => {
                self.pos = start;
                Err(self.err(format!("number `{text}` out of range")))
            }
        }
    }

    fn string(&mut self, quote: char) -> Result<Expr, SyntaxError> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated string")),
                Some(c) if c == quote => {
                    self.pos += 1;
                    return Ok(Expr::Str(out));
                }
                Some('\\') => {
                    self.pos += 1;
                    let esc = match self.peek() {
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('r') => '\r',
                        Some(c @ ('\\' | '"' | '\'')) => c,
                        Some(c) => return Err(self.err(format!("unknown escape `\\{c}`"))),
                        None => return Err(self.err("unterminated string")),
                    };
                    out.push(esc);
                    self.pos += 1;
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, SyntaxError> {
        if depth > MAX_DEPTH {
            return Err(self.err("lists nested too deeply"));
        }
        self.skip_ws();
        match self.peek() {
            Some(q @ ('"' | '\'')) => self.string(q),
            Some('[') => {
                self.pos += 1;
                let mut items = Vec::new();
                self.skip_ws();
                if self.peek() == Some(']') {
                    self.pos += 1;
                    return Ok(Expr::List(items));
                }
                loop {
                    items.push(self.expr(depth + 1)?);
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some(']') => {
                            self.pos += 1;
                            return Ok(Expr::List(items));
                        }
                        _ => return Err(self.err("expected `,` or `]` in list")),
                    }
                }
            }
            Some('{') => {
                self.pos += 1;
                let name = self.ident("placeholder name")?;
                self.expect('}')?;
                Ok(Expr::Placeholder(name))
            }
            Some(c) if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                Ok(Expr::Ident(self.ident("identifier")?))
            }
            Some(c) => Err(self.err(format!("unexpected `{c}` in expression"))),
            None => Err(self.err("expected expression, found end of line")),
        }
    }

    fn statement(&mut self) -> Result<Step, SyntaxError> {
        let target = self.ident("assignment target")?;
        self.expect('=')?;
        let op = self.ident("operator name")?;
        self.expect('(')?;
        let mut args = BTreeMap::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.pos += 1;
        } else {
            loop {
                self.skip_ws();
                if !matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == '_') {
                    return Err(self.err(
                        "expected `name=value` (positional arguments are not accepted)",
                    ));
                }
                let name = self.ident("keyword argument name")?;
                self.skip_ws();
                if self.peek() != Some('=') {
                    return Err(self.err(format!(
                        "argument `{name}` must be given as `{name}=value` (positional arguments are not accepted)"
                    )));
                }
                self.pos += 1;
                let value = self.expr(0)?;
                if args.insert(name.clone(), value).is_some() {
                    return Err(self.err(format!("argument `{name}` given twice")));
                }
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.pos += 1;
                        self.skip_ws();
                        // Trailing comma before `)` is tolerated.
                        if self.peek() == Some(')') {
                            self.pos += 1;
                            break;
                        }
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) => return Err(self.err(format!("expected `,` or `)`, found `{c}`"))),
                    None => return Err(self.err("unclosed `(`")),
                }
            }
        }
        if !self.at_end() {
            return Err(self.err("unexpected text after statement"));
        }
        Ok(Step {
            target,
            op,
            args,
            line: self.line,
        })
    }
}

/// Parse plan text. Fence lines (```), blank lines and `#` comments are
/// skipped.
pub fn parse_plan(text: &str) -> Result<Plan, SyntaxError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with("```") {
            continue;
        }
        let mut cur = Cursor::new(raw, i + 1);
        steps.push(cur.statement()?);
    }
    Ok(Plan { steps })
}
