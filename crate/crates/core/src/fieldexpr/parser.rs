use thiserror::Error;

use super::{Expr, Func};

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte {position}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: expected {expected}")]
    Syntax { expected: &'static str },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("empty expression")]
    Empty,
    #[error("number literal out of range")]
    NumberOutOfRange,
    #[error("expression nested too deeply")]
    TooDeep,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

pub(super) struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    tok: Tok,
    tok_start: usize,
    depth: usize,
}

fn err<T>(position: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { position, kind })
}

impl<'a> Parser<'a> {
    pub(super) fn new(src: &'a [u8]) -> Self {
        Self { src, pos: 0, tok: Tok::End, tok_start: 0, depth: 0 }
    }

    pub(super) fn parse(mut self) -> Result<Expr, ParseError> {
        self.advance()?;
        if self.tok == Tok::End {
            return err(self.tok_start, ParseErrorKind::Empty);
        }
        let e = self.expr()?;
        if self.tok != Tok::End {
            return err(self.tok_start, ParseErrorKind::Syntax { expected: "operator or end of input" });
        }
        Ok(e)
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            self.tok = Tok::End;
            return Ok(());
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            self.tok = t;
            return Ok(());
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            self.tok = Tok::Ident(name.to_string());
            return Ok(());
        }
        err(self.pos, ParseErrorKind::Syntax { expected: "number, identifier, operator or parenthesis" })
    }

    fn number(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut mantissa = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            mantissa += digits(self);
        }
        if mantissa == 0 {
            return err(start, ParseErrorKind::Syntax { expected: "digits" });
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let value: f64 = text.parse().map_err(|_| ParseError {
            position: start,
            kind: ParseErrorKind::Syntax { expected: "number" },
        })?;
        if !value.is_finite() {
            return err(start, ParseErrorKind::NumberOutOfRange);
        }
        self.tok = Tok::Num(value);
        Ok(())
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return err(self.tok_start, ParseErrorKind::TooDeep);
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let make: fn(Box<Expr>, Box<Expr>) -> Expr = match self.tok {
                Tok::Plus => Expr::Add,
                Tok::Minus => Expr::Sub,
                _ => break,
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = make(Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let make: fn(Box<Expr>, Box<Expr>) -> Expr = match self.tok {
                Tok::Star => Expr::Mul,
                Tok::Slash => Expr::Div,
                _ => break,
            };
            self.advance()?;
            let rhs = self.factor()?;
            lhs = make(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let negate = self.tok == Tok::Minus;
        if negate {
            self.advance()?;
        }
        let mut e = self.atom()?;
        if self.tok == Tok::Caret {
            self.advance()?;
            let exponent = self.factor()?;
            e = Expr::Pow(Box::new(e), Box::new(exponent));
        }
        self.depth -= 1;
        Ok(if negate { Expr::Neg(Box::new(e)) } else { e })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok_start;
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance()?;
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "y" => Ok(Expr::Y),
                    "pi" => Ok(Expr::Pi),
                    _ => {
                        let Some(func) = Func::from_name(&name) else {
                            return err(start, ParseErrorKind::UnknownIdentifier(name));
                        };
                        if self.tok != Tok::LParen {
                            return err(self.tok_start, ParseErrorKind::Syntax { expected: "`(` after function name" });
                        }
                        self.advance()?;
                        let arg = self.expr()?;
                        self.expect_rparen()?;
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                }
            }
            _ => err(start, ParseErrorKind::Syntax { expected: "expression" }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.tok != Tok::RParen {
            return err(self.tok_start, ParseErrorKind::Syntax { expected: "`)`" });
        }
        self.advance()
    }
}
