//! Lowered expressions: references resolved to value-slab offsets, lookup
//! calls resolved to table indices. This is what the simulator evaluates.

use alloc::boxed::Box;

use crate::ast::BinaryOp;
use crate::lookup::{eval_lookup, LookupTable};

/// Divisor magnitudes at or below this are treated as zero.
pub const DIV_EPSILON: f64 = 1e-12;

/// `num / den` when the divisor is meaningfully nonzero, else `fallback`.
pub fn safe_divide(num: f64, den: f64, fallback: f64) -> f64 {
    if den.abs() > DIV_EPSILON {
        num / den
    } else {
        fallback
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoweredExpr {
    Const(f64),
    /// Read a slot of the value slab (offset 0 is the simulation clock).
    Load(usize),
    Neg(Box<LoweredExpr>),
    Binary {
        op: BinaryOp,
        lhs: Box<LoweredExpr>,
        rhs: Box<LoweredExpr>,
    },
    If {
        cond: Box<LoweredExpr>,
        then: Box<LoweredExpr>,
        els: Box<LoweredExpr>,
    },
    Lookup {
        table: usize,
        arg: Box<LoweredExpr>,
    },
    SafeDivide(Box<LoweredExpr>, Box<LoweredExpr>, Box<LoweredExpr>),
    Min(Box<LoweredExpr>, Box<LoweredExpr>),
    Max(Box<LoweredExpr>, Box<LoweredExpr>),
    Exp(Box<LoweredExpr>),
}

pub fn eval(expr: &LoweredExpr, values: &[f64], tables: &[LookupTable]) -> f64 {
    match expr {
        LoweredExpr::Const(c) => *c,
        LoweredExpr::Load(off) => values[*off],
        LoweredExpr::Neg(inner) => -eval(inner, values, tables),
        LoweredExpr::Binary { op, lhs, rhs } => {
            let l = eval(lhs, values, tables);
            let r = eval(rhs, values, tables);
            match op {
                BinaryOp::Add => l + r,
                BinaryOp::Sub => l - r,
                BinaryOp::Mul => l * r,
                BinaryOp::Div => l / r,
                BinaryOp::Pow => libm::pow(l, r),
                BinaryOp::Lt => bool_val(l < r),
                BinaryOp::LtEq => bool_val(l <= r),
                BinaryOp::Gt => bool_val(l > r),
                BinaryOp::GtEq => bool_val(l >= r),
                BinaryOp::Eq => bool_val(l == r),
                BinaryOp::NotEq => bool_val(l != r),
            }
        }
        LoweredExpr::If { cond, then, els } => {
            if eval(cond, values, tables) != 0.0 {
                eval(then, values, tables)
            } else {
                eval(els, values, tables)
            }
        }
        LoweredExpr::Lookup { table, arg } => {
            let x = eval(arg, values, tables);
            eval_lookup(&tables[*table], x)
        }
        LoweredExpr::SafeDivide(num, den, fallback) => {
            let n = eval(num, values, tables);
            let d = eval(den, values, tables);
            if d.abs() > DIV_EPSILON {
                n / d
            } else {
                eval(fallback, values, tables)
            }
        }
        LoweredExpr::Min(a, b) => {
            let a = eval(a, values, tables);
            let b = eval(b, values, tables);
            if a < b {
                a
            } else {
                b
            }
        }
        LoweredExpr::Max(a, b) => {
            let a = eval(a, values, tables);
            let b = eval(b, values, tables);
            if a > b {
                a
            } else {
                b
            }
        }
        LoweredExpr::Exp(inner) => libm::exp(eval(inner, values, tables)),
    }
}

#[inline]
fn bool_val(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}
