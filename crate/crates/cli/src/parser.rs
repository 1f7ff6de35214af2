//! `.pivp` system files.
//!
//! ```text
//! # comment
//! dim 2
//! eq y1' = y2
//! eq y2' = -y1 + 1/2*(y1 - y2)^2
//! y0 = 1 0
//! t0 = 0
//! ```
//!
//! Expressions use `+ - * ^`, parentheses, unary minus, integer or `a/b`
//! literals and variables `y1..yd`. Exponents are nonnegative integers.

use std::fmt;

use num_traits::Zero;
use pivp_core::numeric::parse_rational;
use pivp_core::poly::{PolyVector, SparsePoly};
use pivp_core::taylor::PivpProblem;
use pivp_core::{BigInt, BigRational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical(char),
    UnknownVariable { name: String, dim: usize },
    NegativeExponent,
    FractionalExponent,
    DimensionMismatch { expected: usize, found: usize },
    Syntax(String),
}

/// A parse failure at a 1-based `line` and `column`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Lexical(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnknownVariable { name, dim } => {
                write!(f, "unknown variable {name} (dimension is {dim})")
            }
            ParseErrorKind::NegativeExponent => write!(f, "exponents must be nonnegative"),
            ParseErrorKind::FractionalExponent => write!(f, "exponents must be integers"),
            ParseErrorKind::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            ParseErrorKind::Syntax(msg) => write!(f, "{msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemFile {
    pub dim: usize,
    pub equations: Vec<SparsePoly>,
    pub y0: Vec<BigRational>,
    pub t0: BigRational,
}

impl SystemFile {
    pub fn vector_field(&self) -> PolyVector {
        PolyVector::new(self.equations.clone()).expect("parser checks dimensions")
    }

    pub fn to_problem(&self) -> PivpProblem {
        PivpProblem::new(self.vector_field(), self.t0.clone(), self.y0.clone()).expect("parser checks dimensions")
    }

    pub fn from_problem(problem: &PivpProblem) -> Self {
        Self {
            dim: problem.dim(),
            equations: problem.p.components().to_vec(),
            y0: problem.y0.clone(),
            t0: problem.t0.clone(),
        }
    }
}

/// Canonical form; parsing it gives back the same system.
impl fmt::Display for SystemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {}", self.dim)?;
        for (i, eq) in self.equations.iter().enumerate() {
            writeln!(f, "eq y{}' = {eq}", i + 1)?;
        }
        let y0: Vec<String> = self.y0.iter().map(|v| v.to_string()).collect();
        writeln!(f, "y0 = {}", y0.join(" "))?;
        writeln!(f, "t0 = {}", self.t0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Int(BigInt),
    Prime,
    Equals,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "{w}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Prime => write!(f, "'"),
            Tok::Equals => write!(f, "="),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Caret => write!(f, "^"),
            Tok::Slash => write!(f, "/"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    column: usize,
}

fn lex(line: usize, text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push(Spanned { tok: Tok::Int(digits.parse().expect("ascii digits")), column });
            continue;
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Spanned { tok: Tok::Word(chars[start..i].iter().collect()), column });
            continue;
        } else {
            match c {
                '\'' => Tok::Prime,
                '=' => Tok::Equals,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '^' => Tok::Caret,
                '/' => Tok::Slash,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                other => return Err(ParseError { line, column, kind: ParseErrorKind::Lexical(other) }),
            }
        };
        out.push(Spanned { tok, column });
        i += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Expr {
    Num(BigRational),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    fn expand(&self, dim: usize) -> SparsePoly {
        match self {
            Expr::Num(q) => SparsePoly::constant(dim, q.clone()),
            Expr::Var(v) => SparsePoly::var(dim, *v),
            Expr::Neg(e) => -&e.expand(dim),
            Expr::Add(a, b) => &a.expand(dim) + &b.expand(dim),
            Expr::Sub(a, b) => &a.expand(dim) - &b.expand(dim),
            Expr::Mul(a, b) => &a.expand(dim) * &b.expand(dim),
            Expr::Pow(e, n) => e.expand(dim).pow(*n),
        }
    }
}

struct LineParser<'a> {
    line: usize,
    toks: &'a [Spanned],
    pos: usize,
    end_column: usize,
}

impl<'a> LineParser<'a> {
    fn new(line: usize, toks: &'a [Spanned], text: &str) -> Self {
        Self { line, toks, pos: 0, end_column: text.trim_end().chars().count() + 1 }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |s| s.column)
    }

    fn error_at(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, column, kind }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.error_at(self.column(), ParseErrorKind::Syntax(msg.into()))
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => format!("'{t}'"),
            None => "end of line".to_string(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected '{tok}', found {}", self.found())))
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.syntax(format!("unexpected {} after the end of the statement", self.found()))),
        }
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.syntax(format!("expected an integer, found {}", self.found()))),
        }
    }

    /// `[-]a[/b]`
    fn rational(&mut self) -> Result<BigRational, ParseError> {
        let column = self.column();
        let negative = self.peek() == Some(&Tok::Minus);
        if negative {
            self.pos += 1;
        }
        let mut text = self.integer()?.to_string();
        if self.peek() == Some(&Tok::Slash) {
            self.pos += 1;
            text = format!("{text}/{}", self.integer()?);
        }
        let q = parse_rational(&text).map_err(|e| self.error_at(column, ParseErrorKind::Syntax(e.to_string())))?;
        Ok(if negative { -q } else { q })
    }

    /// Variable index from `y<i>`, 0-based.
    fn variable(&self, name: &str, column: usize, dim: usize) -> Result<usize, ParseError> {
        let unknown = || self.error_at(column, ParseErrorKind::UnknownVariable { name: name.to_string(), dim });
        let index = name.strip_prefix('y').ok_or_else(unknown)?;
        if index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) || index.starts_with('0') {
            return Err(unknown());
        }
        match index.parse::<usize>() {
            Ok(i) if (1..=dim).contains(&i) => Ok(i - 1),
            _ => Err(unknown()),
        }
    }

    fn expr(&mut self, dim: usize) -> Result<Expr, ParseError> {
        let mut lhs = self.term(dim)?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term(dim)?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term(dim)?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self, dim: usize) -> Result<Expr, ParseError> {
        let mut lhs = self.unary(dim)?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary(dim)?));
        }
        Ok(lhs)
    }

    fn unary(&mut self, dim: usize) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary(dim)?)));
        }
        self.power(dim)
    }

    fn power(&mut self, dim: usize) -> Result<Expr, ParseError> {
        let base = self.atom(dim)?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let column = self.column();
        match self.peek() {
            Some(Tok::Minus) => return Err(self.error_at(column, ParseErrorKind::NegativeExponent)),
            Some(Tok::Int(_)) => {}
            _ => return Err(self.syntax(format!("expected an exponent, found {}", self.found()))),
        }
        let n = self.integer()?;
        if self.peek() == Some(&Tok::Slash) {
            return Err(self.error_at(column, ParseErrorKind::FractionalExponent));
        }
        if self.peek() == Some(&Tok::Caret) {
            return Err(self.syntax("chained exponents need parentheses"));
        }
        let n =
            u32::try_from(n).map_err(|_| self.error_at(column, ParseErrorKind::Syntax("exponent too large".into())))?;
        Ok(Expr::Pow(Box::new(base), n))
    }

    fn atom(&mut self, dim: usize) -> Result<Expr, ParseError> {
        let column = self.column();
        match self.peek().cloned() {
            Some(Tok::Int(_)) => {
                let q = self.rational()?;
                Ok(Expr::Num(q))
            }
            Some(Tok::Word(name)) => {
                let v = self.variable(&name, column, dim)?;
                self.pos += 1;
                Ok(Expr::Var(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr(dim)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.syntax(format!("expected a number, variable or '(', found {}", self.found()))),
        }
    }
}

/// Parses a system file and expands every equation to canonical sparse form.
pub fn parse_system(text: &str) -> Result<SystemFile, ParseError> {
    let mut dim: Option<usize> = None;
    let mut equations: Vec<Option<SparsePoly>> = Vec::new();
    let mut y0: Option<Vec<BigRational>> = None;
    let mut t0: Option<BigRational> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = lex(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        last_line = line;
        let mut p = LineParser::new(line, &toks, raw);
        let Some(Tok::Word(keyword)) = p.peek().cloned() else {
            return Err(p.syntax(format!("expected dim, eq, y0 or t0, found {}", p.found())));
        };
        let duplicate = |p: &LineParser| p.syntax(format!("duplicate {keyword} statement"));
        p.pos += 1;
        match keyword.as_str() {
            "dim" => {
                if dim.is_some() {
                    return Err(ParseError { column: 1, ..duplicate(&p) });
                }
                let column = p.column();
                let n = p.integer()?;
                p.finish()?;
                let d = usize::try_from(&n).ok().filter(|&d| d >= 1).ok_or_else(|| {
                    p.error_at(column, ParseErrorKind::Syntax("dimension must be a positive integer".into()))
                })?;
                dim = Some(d);
                equations = vec![None; d];
            }
            "eq" => {
                let d = dim.ok_or_else(|| ParseError { column: 1, ..p.syntax("dim must be declared before eq") })?;
                let column = p.column();
                let name = match p.peek() {
                    Some(Tok::Word(w)) => w.clone(),
                    _ => return Err(p.syntax(format!("expected a variable, found {}", p.found()))),
                };
                let v = p.variable(&name, column, d)?;
                p.pos += 1;
                p.expect(Tok::Prime)?;
                p.expect(Tok::Equals)?;
                let e = p.expr(d)?;
                p.finish()?;
                if equations[v].is_some() {
                    return Err(p.error_at(column, ParseErrorKind::Syntax(format!("second equation for {name}"))));
                }
                equations[v] = Some(e.expand(d));
            }
            "y0" | "t0" => {
                if (keyword == "y0" && y0.is_some()) || (keyword == "t0" && t0.is_some()) {
                    return Err(ParseError { column: 1, ..duplicate(&p) });
                }
                p.expect(Tok::Equals)?;
                let first_column = p.column();
                let mut values = vec![p.rational()?];
                while p.peek().is_some() {
                    values.push(p.rational()?);
                }
                if keyword == "t0" {
                    if values.len() != 1 {
                        return Err(p.error_at(first_column, ParseErrorKind::Syntax("t0 takes one value".into())));
                    }
                    t0 = values.pop();
                } else {
                    if let Some(d) = dim {
                        if values.len() != d {
                            return Err(p.error_at(
                                first_column,
                                ParseErrorKind::DimensionMismatch { expected: d, found: values.len() },
                            ));
                        }
                    } else {
                        return Err(ParseError { column: 1, ..p.syntax("dim must be declared before y0") });
                    }
                    y0 = Some(values);
                }
            }
            other => {
                return Err(ParseError { column: 1, ..p.syntax(format!("unknown statement '{other}'")) });
            }
        }
    }

    let end = |msg: String| ParseError { line: last_line.max(1), column: 1, kind: ParseErrorKind::Syntax(msg) };
    let dim = dim.ok_or_else(|| end("missing dim statement".into()))?;
    let found = equations.iter().filter(|e| e.is_some()).count();
    if found != dim {
        return Err(ParseError {
            line: last_line,
            column: 1,
            kind: ParseErrorKind::DimensionMismatch { expected: dim, found },
        });
    }
    let y0 = y0.ok_or_else(|| end("missing y0 statement".into()))?;
    Ok(SystemFile {
        dim,
        equations: equations.into_iter().map(|e| e.expect("checked")).collect(),
        y0,
        t0: t0.unwrap_or_else(BigRational::zero),
    })
}
