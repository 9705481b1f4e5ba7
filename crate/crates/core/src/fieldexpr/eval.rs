//! Stack-machine evaluation of a compiled expression.

use std::f64::consts::PI;

use thiserror::Error;

use super::{Expr, Func};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    SqrtOfNegative,
    DivisionByZero,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} at sample (x={x}, y={y})", match kind {
    DomainKind::SqrtOfNegative => "square root of a negative number",
    DomainKind::DivisionByZero => "division by zero",
    DomainKind::NonFinite => "non-finite value",
})]
pub struct EvalError {
    pub kind: DomainKind,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    X,
    Y,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Call(Func),
}

#[derive(Debug, Clone)]
pub(super) struct Program {
    ops: Vec<Op>,
}

impl Program {
    pub(super) fn compile(e: &Expr) -> Self {
        let mut ops = Vec::new();
        emit(e, &mut ops);
        Self { ops }
    }

    pub(super) fn run(&self, x: f64, y: f64, stack: &mut Vec<f64>) -> Result<f64, EvalError> {
        let fail = |kind| EvalError { kind, x, y };
        stack.clear();
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::X => x,
                Op::Y => y,
                Op::Neg => -stack.pop().unwrap(),
                Op::Call(f) => {
                    let a = stack.pop().unwrap();
                    match f {
                        Func::Sin => a.sin(),
                        Func::Cos => a.cos(),
                        Func::Exp => a.exp(),
                        Func::Abs => a.abs(),
                        Func::Sqrt if a < 0.0 => return Err(fail(DomainKind::SqrtOfNegative)),
                        Func::Sqrt => a.sqrt(),
                    }
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => {
                    let b = stack.pop().unwrap();
                    let a = stack.pop().unwrap();
                    match *op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div if b == 0.0 => return Err(fail(DomainKind::DivisionByZero)),
                        Op::Div => a / b,
                        _ => a.powf(b),
                    }
                }
            };
            if !v.is_finite() {
                return Err(fail(DomainKind::NonFinite));
            }
            stack.push(v);
        }
        Ok(stack.pop().expect("non-empty program"))
    }
}

fn emit(e: &Expr, ops: &mut Vec<Op>) {
    match e {
        Expr::Num(v) => ops.push(Op::Const(*v)),
        Expr::Pi => ops.push(Op::Const(PI)),
        Expr::X => ops.push(Op::X),
        Expr::Y => ops.push(Op::Y),
        Expr::Neg(a) => {
            emit(a, ops);
            ops.push(Op::Neg);
        }
        Expr::Call(f, a) => {
            emit(a, ops);
            ops.push(Op::Call(*f));
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
            emit(a, ops);
            emit(b, ops);
            ops.push(match e {
                Expr::Add(..) => Op::Add,
                Expr::Sub(..) => Op::Sub,
                Expr::Mul(..) => Op::Mul,
                Expr::Div(..) => Op::Div,
                _ => Op::Pow,
            });
        }
    }
}
