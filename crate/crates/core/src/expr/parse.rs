use alloc::boxed::Box;
use alloc::string::{String, ToString};
use core::fmt;

use super::Expr;

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
    Arity { name: String, expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source text.
    pub offset: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error at byte {}: {msg}", self.offset),
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier `{name}` at byte {}", self.offset)
            }
            ParseErrorKind::Arity { name, expected, found } => {
                write!(f, "`{name}` takes {expected} argument(s), got {found} (byte {})", self.offset)
            }
        }
    }
}

impl core::error::Error for ParseError {}

/// Parses an expression; any identifier other than `t` and the function
/// names becomes a named parameter.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    Parser::new(src, None).run()
}

/// Like [`parse`], but identifiers outside `allowed` are rejected.
pub fn parse_with_params(src: &str, allowed: &[&str]) -> Result<Expr, ParseError> {
    Parser::new(src, Some(allowed)).run()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(u8),
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
    allowed: Option<&'a [&'a str]>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, allowed: Option<&'a [&'a str]>) -> Self {
        Parser { src, pos: 0, tok: Tok::End, tok_start: 0, allowed }
    }

    fn run(mut self) -> Result<Expr, ParseError> {
        self.bump()?;
        let e = self.sum()?;
        if self.tok != Tok::End {
            return Err(self.err("unexpected trailing input"));
        }
        Ok(e)
    }

    fn err(&self, msg: &str) -> ParseError {
        ParseError { kind: ParseErrorKind::Syntax(msg.to_string()), offset: self.tok_start }
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let mut look = self.pos + 1;
                if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                    look += 1;
                }
                if look < bytes.len() && bytes[look].is_ascii_digit() {
                    self.pos = look;
                    while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                }
            }
            let text = &self.src[start..self.pos];
            let v: f64 = text
                .parse()
                .map_err(|_| ParseError { kind: ParseErrorKind::Syntax(alloc::format!("malformed number `{text}`")), offset: start })?;
            self.tok = Tok::Num(v);
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
        } else if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Op(c);
        } else {
            let ch = self.src[self.pos..].chars().next().unwrap_or('?');
            return Err(ParseError { kind: ParseErrorKind::Syntax(alloc::format!("unexpected character `{ch}`")), offset: self.pos });
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            match self.tok {
                Tok::Op(b'+') => {
                    self.bump()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Tok::Op(b'-') => {
                    self.bump()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Op(b'*') => {
                    self.bump()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op(b'/') => {
                    self.bump()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Op(b'-') {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.tok == Tok::Op(b'+') {
            self.bump()?;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Op(b'^') {
            self.bump()?;
            // The exponent may carry its own sign: t^-1.
            let ex = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(ex)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok_start;
        match core::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Const(v))
            }
            Tok::Op(b'(') => {
                self.bump()?;
                let e = self.sum()?;
                if self.tok != Tok::Op(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.bump()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump()?;
                if self.tok == Tok::Op(b'(') {
                    return self.call(name, start);
                }
                if name == "t" {
                    return Ok(Expr::Var);
                }
                if let Some(allowed) = self.allowed {
                    if !allowed.contains(&name.as_str()) {
                        return Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), offset: start });
                    }
                }
                Ok(Expr::Param(name))
            }
            Tok::End => Err(self.err("unexpected end of input")),
            Tok::Op(c) => {
                self.tok = Tok::Op(c);
                Err(self.err(&alloc::format!("unexpected `{}`", c as char)))
            }
        }
    }

    fn call(&mut self, name: String, start: usize) -> Result<Expr, ParseError> {
        // current token is `(`
        self.bump()?;
        let mut args = alloc::vec::Vec::new();
        if self.tok != Tok::Op(b')') {
            loop {
                args.push(self.sum()?);
                if self.tok == Tok::Op(b',') {
                    self.bump()?;
                    continue;
                }
                break;
            }
        }
        if self.tok != Tok::Op(b')') {
            return Err(self.err("expected `)` after arguments"));
        }
        self.bump()?;
        let build: fn(Box<Expr>) -> Expr = match name.as_str() {
            "exp" => Expr::Exp,
            "log" | "ln" => Expr::Log,
            _ => return Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), offset: start }),
        };
        if args.len() != 1 {
            return Err(ParseError { kind: ParseErrorKind::Arity { name, expected: 1, found: args.len() }, offset: start });
        }
        Ok(build(Box::new(args.pop().unwrap())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_offsets() {
        let e = parse("1 + * t").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse("sin(t)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("sin".into()));
        let e = parse("exp(t, 2)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Arity { found: 2, .. }));
        let e = parse_with_params("k*t + c", &["k"]).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("c".into()));
        assert_eq!(e.offset, 6);
        assert!(parse("(t").is_err());
        assert!(parse("t)").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn numbers_with_exponents() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse("2E2").unwrap(), Expr::Const(200.0));
    }
}
