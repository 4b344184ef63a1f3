//! Expression grammar for metric entries.
//!
//! ```text
//! expr   := term { ('+' | '-') term }
//! term   := factor { ('*' | '/') factor }
//! factor := '-' factor | power
//! power  := atom [ '^' factor ]          (right associative)
//! atom   := number | 'i' | z1..z9 | conj '(' expr ')' | exp '(' expr ')'
//!         | log '(' expr ')' | '(' expr ')'
//! ```
//!
//! Power binds tighter than unary minus, so `-x^2` is `-(x^2)` and `x^-2`
//! parses with a negated exponent. Numbers are plain f64 literals; the only
//! complex literal is `i`.

use std::fmt;

use thiserror::Error;

/// AST of a metric expression. Variables are zero-based: `Var(0)` is `z1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    I,
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Conj,
    Exp,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: found {found}, expected one of {expected:?}")]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("malformed number at byte {offset}")]
    BadNumber { offset: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    I,
    Func(UnaryOp),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number `{v}`"),
            Tok::Var(k) => format!("`z{}`", k + 1),
            Tok::I => "`i`".into(),
            Tok::Func(UnaryOp::Conj) => "`conj`".into(),
            Tok::Func(UnaryOp::Exp) => "`exp`".into(),
            Tok::Func(UnaryOp::Log) => "`log`".into(),
            Tok::Func(UnaryOp::Neg) => "`-`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token with the byte offset it starts at.
    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((start, Tok::Eof));
        }
        let b = self.src[self.pos];
        let simple = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Ok((start, tok));
        }
        if b.is_ascii_digit() || b == b'.' {
            let mut end = self.pos;
            let mut seen_digit = false;
            while end < self.src.len() && (self.src[end].is_ascii_digit() || self.src[end] == b'.') {
                seen_digit |= self.src[end].is_ascii_digit();
                end += 1;
            }
            // optional exponent
            if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                let mut e = end + 1;
                if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                    e += 1;
                }
                if e < self.src.len() && self.src[e].is_ascii_digit() {
                    while e < self.src.len() && self.src[e].is_ascii_digit() {
                        e += 1;
                    }
                    end = e;
                }
            }
            if !seen_digit {
                return Err(ParseError::BadNumber { offset: start });
            }
            let text = std::str::from_utf8(&self.src[start..end]).expect("ascii digits");
            let value: f64 = text.parse().map_err(|_| ParseError::BadNumber { offset: start })?;
            self.pos = end;
            return Ok((start, Tok::Num(value)));
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            let mut end = self.pos;
            while end < self.src.len()
                && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
            {
                end += 1;
            }
            let name = std::str::from_utf8(&self.src[start..end])
                .expect("ascii identifier")
                .to_string();
            self.pos = end;
            let tok = match name.as_str() {
                "i" => Tok::I,
                "conj" => Tok::Func(UnaryOp::Conj),
                "exp" => Tok::Func(UnaryOp::Exp),
                "log" => Tok::Func(UnaryOp::Log),
                _ => {
                    if let Some(k) = variable_index(&name) {
                        Tok::Var(k)
                    } else {
                        return Err(ParseError::UnknownIdentifier { offset: start, name });
                    }
                }
            };
            return Ok((start, tok));
        }
        Err(ParseError::Syntax {
            offset: start,
            found: format!("byte 0x{b:02x}"),
            expected: vec!["number", "identifier", "operator", "parenthesis"],
        })
    }
}

/// `z1`..`z9` map to variable indices 0..8.
fn variable_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('z')?;
    if rest.len() != 1 {
        return None;
    }
    let d = rest.chars().next()?.to_digit(10)?;
    if (1..=9).contains(&d) {
        Some(d as usize - 1)
    } else {
        None
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    current: (usize, Tok),
}

const ATOM_EXPECTED: &[&str] =
    &["number", "`i`", "`z1`..`z9`", "`conj`", "`exp`", "`log`", "`(`", "`-`"];

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let current = lexer.next()?;
        Ok(Self { lexer, current })
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        self.current = self.lexer.next()?;
        Ok(())
    }

    fn syntax_error(&self, expected: &'static [&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.current.0,
            found: self.current.1.describe(),
            expected: expected.to_vec(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.current.1 {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.current.1 {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.advance()?;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.current.1, Tok::Minus) {
            self.advance()?;
            let inner = self.factor()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.current.1, Tok::Caret) {
            self.advance()?;
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (_, tok) = self.current.clone();
        match tok {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Const(v))
            }
            Tok::I => {
                self.advance()?;
                Ok(Expr::I)
            }
            Tok::Var(k) => {
                self.advance()?;
                Ok(Expr::Var(k))
            }
            Tok::Func(op) => {
                self.advance()?;
                if !matches!(self.current.1, Tok::LParen) {
                    return Err(self.syntax_error(&["`(`"]));
                }
                self.advance()?;
                let inner = self.expr()?;
                if !matches!(self.current.1, Tok::RParen) {
                    return Err(self.syntax_error(&["`)`"]));
                }
                self.advance()?;
                Ok(Expr::Unary(op, Box::new(inner)))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                if !matches!(self.current.1, Tok::RParen) {
                    return Err(self.syntax_error(&["`)`"]));
                }
                self.advance()?;
                Ok(inner)
            }
            _ => Err(self.syntax_error(ATOM_EXPECTED)),
        }
    }
}

/// Parse a metric expression. All failures are structured errors with byte
/// offsets; no input panics.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser::new(text)?;
    let expr = parser.expr()?;
    if !matches!(parser.current.1, Tok::Eof) {
        return Err(parser.syntax_error(&["operator", "end of input"]));
    }
    Ok(expr)
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        let parens = prec < min_prec;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(v) => write!(f, "{v}")?,
            Expr::I => write!(f, "i")?,
            Expr::Var(k) => write!(f, "z{}", k + 1)?,
            Expr::Unary(UnaryOp::Neg, inner) => {
                write!(f, "-")?;
                inner.fmt_prec(f, 3)?;
            }
            Expr::Unary(op, inner) => {
                let name = match op {
                    UnaryOp::Conj => "conj",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Log => "log",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}(")?;
                inner.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Binary(op, lhs, rhs) => {
                let (sym, lp, rp) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    // pow is right associative and binds above unary minus
                    BinOp::Pow => ("^", 5, 3),
                };
                lhs.fmt_prec(f, lp)?;
                write!(f, "{sym}")?;
                rhs.fmt_prec(f, rp)?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_metric_expression() {
        let e = parse("(1 - z1*conj(z1))^-2").unwrap();
        let want = Expr::Binary(
            BinOp::Pow,
            Box::new(Expr::Binary(
                BinOp::Sub,
                Box::new(Expr::Const(1.0)),
                Box::new(Expr::Binary(
                    BinOp::Mul,
                    Box::new(Expr::Var(0)),
                    Box::new(Expr::Unary(UnaryOp::Conj, Box::new(Expr::Var(0)))),
                )),
            )),
            Box::new(Expr::Unary(UnaryOp::Neg, Box::new(Expr::Const(2.0)))),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn syntax_error_carries_offset() {
        match parse("1 +* z1") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_is_rejected() {
        assert!(matches!(
            parse("z12 + 1"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse("sin(z1)"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        // -2^2 must parse as -(2^2)
        let e = parse("-2^2").unwrap();
        assert_eq!(
            e,
            Expr::Unary(
                UnaryOp::Neg,
                Box::new(Expr::Binary(
                    BinOp::Pow,
                    Box::new(Expr::Const(2.0)),
                    Box::new(Expr::Const(2.0))
                ))
            )
        );
    }

    #[test]
    fn pow_is_right_associative() {
        let e = parse("z1^2^3").unwrap();
        let want = Expr::Binary(
            BinOp::Pow,
            Box::new(Expr::Var(0)),
            Box::new(Expr::Binary(
                BinOp::Pow,
                Box::new(Expr::Const(2.0)),
                Box::new(Expr::Const(3.0)),
            )),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn round_trip_of_catalog_expressions() {
        let sources = [
            "(1 - z1*conj(z1))^-2",
            "-4/(z1 - conj(z1))^2",
            "1 + z1*conj(z1)",
            "i*z1/(1 - z1*conj(z1))",
            "-log(1 - z1*conj(z1))",
            "exp(log(1 + z1))",
            "1e-3*z2 + 2.5",
        ];
        for src in sources {
            let ast = parse(src).unwrap();
            let printed = ast.to_string();
            let reparsed = parse(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
            assert_eq!(ast, reparsed, "round trip failed for {src} -> {printed}");
        }
    }

    #[test]
    fn trailing_garbage_is_an_error() {
        assert!(parse("1 + 2 )").is_err());
        assert!(parse("").is_err());
        assert!(parse("(1 + 2").is_err());
    }
}
