//! Terms over a single ternary symbol `m`, identities between them, and a
//! parser for the textual identity language.
//!
//! Grammar (whitespace between tokens is ignored):
//!
//! ```text
//! identity := [label ":"] term "=" term
//! term     := var | "m" "(" term "," term "," term ")"
//! var      := [a-z][a-z0-9]*
//! ```
//!
//! A bare `m` not followed by `(` is an ordinary variable.

use std::fmt;

use thiserror::Error;

/// A term: a variable or an application of the ternary operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    App(Box<[Term; 3]>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn app(first: Term, second: Term, third: Term) -> Term {
        Term::App(Box::new([first, second, third]))
    }

    /// Nesting depth; a variable has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Variables in left-to-right first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(name) => {
                if !out.iter().any(|v| v == name) {
                    out.push(name.clone());
                }
            }
            Term::App(args) => args.iter().for_each(|a| a.collect_variables(out)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(name) => f.write_str(name),
            Term::App(args) => write!(f, "m({},{},{})", args[0], args[1], args[2]),
        }
    }
}

/// Canonical rendering: `m(a,b,c)` with no whitespace.
pub fn render_term(term: &Term) -> String {
    term.to_string()
}

/// See [`Term::variables`].
pub fn variables_of(term: &Term) -> Vec<String> {
    term.variables()
}

/// An equation `lhs = rhs`, universally quantified over its variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Identity {
    pub name: Option<String>,
    pub lhs: Term,
    pub rhs: Term,
}

impl Identity {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Identity { name: None, lhs, rhs }
    }

    pub fn named(name: impl Into<String>, lhs: Term, rhs: Term) -> Self {
        Identity { name: Some(name.into()), lhs, rhs }
    }

    /// First-occurrence order over `lhs` then `rhs`, deduplicated.
    pub fn variable_order(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.lhs.collect_variables(&mut out);
        self.rhs.collect_variables(&mut out);
        out
    }

    /// The label if present, otherwise the rendered equation.
    pub fn display_name(&self) -> String {
        match &self.name {
            Some(name) => name.clone(),
            None => format!("{} = {}", self.lhs, self.rhs),
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.name {
            write!(f, "{name}: ")?;
        }
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("arity error at byte {offset}: m takes 3 arguments, got {found}")]
    Arity { offset: usize, found: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::Arity { offset, .. } => *offset,
        }
    }

    fn shifted(self, by: usize) -> Self {
        match self {
            ParseError::Syntax { offset, expected } => ParseError::Syntax { offset: offset + by, expected },
            ParseError::Arity { offset, found } => ParseError::Arity { offset: offset + by, found },
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { src: text.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax { offset: self.pos, expected: expected.to_string() }
    }

    fn identifier(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(b) if b.is_ascii_lowercase() => self.pos += 1,
            _ => return Err(self.error("variable or m(...)")),
        }
        while let Some(b) = self.src.get(self.pos) {
            if b.is_ascii_lowercase() || b.is_ascii_digit() {
                self.pos += 1;
            } else {
                break;
            }
        }
        // The slice is ASCII by construction.
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let name = self.identifier()?;
        if name != "m" || self.peek() != Some(b'(') {
            return Ok(Term::Var(name));
        }
        let open = self.pos;
        self.pos += 1;
        let mut args = vec![self.term()?];
        loop {
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    args.push(self.term()?);
                }
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error("',' or ')'")),
            }
        }
        let found = args.len();
        match <[Term; 3]>::try_from(args) {
            Ok(args) => Ok(Term::App(Box::new(args))),
            Err(_) => Err(ParseError::Arity { offset: open, found }),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error("end of input")),
        }
    }
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut parser = Parser::new(text);
    let term = parser.term()?;
    parser.finish()?;
    Ok(term)
}

fn is_label_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'\'')
}

/// Parses `[label:] lhs = rhs`. Labels may contain letters, digits, `_`, `-`
/// and `'` (so `H8'` and `h5-9` are valid).
pub fn parse_identity(text: &str) -> Result<Identity, ParseError> {
    let (name, body, body_start) = match text.find(':') {
        Some(colon) => {
            let raw = &text[..colon];
            let label = raw.trim();
            let label_start = raw.len() - raw.trim_start().len();
            if label.is_empty() {
                return Err(ParseError::Syntax { offset: colon, expected: "label before ':'".into() });
            }
            if let Some(bad) = label.bytes().position(|b| !is_label_byte(b)) {
                return Err(ParseError::Syntax {
                    offset: label_start + bad,
                    expected: "label character [A-Za-z0-9_'-]".into(),
                });
            }
            (Some(label.to_string()), &text[colon + 1..], colon + 1)
        }
        None => (None, text, 0),
    };

    let mut eqs = body.match_indices('=').map(|(i, _)| i);
    let eq = eqs.next().ok_or(ParseError::Syntax { offset: text.len(), expected: "'='".into() })?;
    if let Some(second) = eqs.next() {
        return Err(ParseError::Syntax { offset: body_start + second, expected: "a single '='".into() });
    }
    let lhs = parse_term(&body[..eq]).map_err(|e| e.shifted(body_start))?;
    let rhs = parse_term(&body[eq + 1..]).map_err(|e| e.shifted(body_start + eq + 1))?;
    Ok(Identity { name, lhs, rhs })
}

/// A parse failure inside a multi-line identity file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {source}")]
pub struct LineError {
    pub line: usize,
    #[source]
    pub source: ParseError,
}

/// Parses the identity-file format: one identity per line, `#` comments,
/// blank lines ignored. Line numbers in errors are 1-based.
pub fn parse_identity_lines(text: &str) -> Result<Vec<Identity>, LineError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = match raw.find('#') {
            Some(hash) => &raw[..hash],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let identity = parse_identity(content).map_err(|source| LineError { line: idx + 1, source })?;
        out.push(identity);
    }
    Ok(out)
}
