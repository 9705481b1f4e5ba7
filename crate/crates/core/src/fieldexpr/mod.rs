//! A tiny expression language for scalar fields on the torus.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ['-'] atom ['^' factor]
//! atom   := number | 'x' | 'y' | 'pi' | fn '(' expr ')' | '(' expr ')'
//! fn     := sin | cos | exp | sqrt | abs
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-2^2 = -4` and `2^3^2 = 512`.

mod eval;
mod parser;

use std::fmt;

pub use eval::EvalError;
pub use parser::{ParseError, ParseErrorKind};

use crate::grid::{PeriodicGrid, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Pi,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn level(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        let wrap = self.level() < min_level;
        if wrap {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(v) => write!(f, "{v:?}")?,
            Expr::X => f.write_str("x")?,
            Expr::Y => f.write_str("y")?,
            Expr::Pi => f.write_str("pi")?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, 4)?;
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { "+" } else { "-" })?;
                b.write_at(f, 2)?;
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                b.write_at(f, 3)?;
            }
            Expr::Pow(a, b) => {
                a.write_at(f, 5)?;
                f.write_str("^")?;
                b.write_at(f, 3)?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_at(f, 0)?;
                f.write_str(")")?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

/// A parsed expression together with its compiled evaluation program.
#[derive(Debug, Clone)]
pub struct FieldExpr {
    ast: Expr,
    program: eval::Program,
}

impl PartialEq for FieldExpr {
    fn eq(&self, other: &Self) -> bool {
        self.ast == other.ast
    }
}

impl FieldExpr {
    pub fn from_ast(ast: Expr) -> Self {
        let program = eval::Program::compile(&ast);
        Self { ast, program }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    /// Value at a single point.
    pub fn eval_at(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        self.program.run(x, y, &mut Vec::new())
    }

    /// Samples the expression on every grid point, reporting the first
    /// offending sample (row-major order) on a domain error.
    pub fn evaluate(&self, grid: &PeriodicGrid) -> Result<ScalarField, EvalError> {
        let mut stack = Vec::with_capacity(16);
        let mut values = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let (x, y) = grid.coords(idx);
            values.push(self.program.run(x, y, &mut stack)?);
        }
        Ok(ScalarField::new(grid, values).expect("evaluator only yields finite values"))
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

pub fn parse(src: &str) -> Result<FieldExpr, ParseError> {
    parse_bytes(src.as_bytes())
}

/// Parses raw bytes; any non-ASCII byte is a syntax error at its offset.
pub fn parse_bytes(src: &[u8]) -> Result<FieldExpr, ParseError> {
    parser::Parser::new(src).parse().map(FieldExpr::from_ast)
}
