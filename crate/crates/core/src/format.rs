//! Canonical pretty-printer for `.sdm` files.
//!
//! `format(parse(format(parse(x))))` is byte-identical to
//! `format(parse(x))`: declaration order is preserved, spacing is
//! normalized, and parentheses are emitted only where precedence demands
//! them.

use alloc::string::String;
use crate::ast::*;

/// Operator precedence used to decide parenthesization. Larger binds
/// tighter.
fn prec(expr: &Expr) -> u8 {
    match expr {
        Expr::If { .. } => 0,
        Expr::Binary { op, .. } => match op {
            BinaryOp::Lt
            | BinaryOp::LtEq
            | BinaryOp::Gt
            | BinaryOp::GtEq
            | BinaryOp::Eq
            | BinaryOp::NotEq => 1,
            BinaryOp::Add | BinaryOp::Sub => 2,
            BinaryOp::Mul | BinaryOp::Div => 3,
            BinaryOp::Pow => 5,
        },
        Expr::Neg(_) => 4,
        Expr::Number(_) | Expr::Ref { .. } | Expr::Call { .. } => 6,
    }
}

fn op_str(op: BinaryOp) -> &'static str {
    match op {
        BinaryOp::Add => "+",
        BinaryOp::Sub => "-",
        BinaryOp::Mul => "*",
        BinaryOp::Div => "/",
        BinaryOp::Pow => "^",
        BinaryOp::Lt => "<",
        BinaryOp::LtEq => "<=",
        BinaryOp::Gt => ">",
        BinaryOp::GtEq => ">=",
        BinaryOp::Eq => "==",
        BinaryOp::NotEq => "!=",
    }
}

fn fmt_number(n: f64) -> String {
    alloc::format!("{n}")
}

fn write_child(out: &mut String, child: &Expr, needs_parens: bool) {
    if needs_parens {
        out.push('(');
        write_expr(out, child);
        out.push(')');
    } else {
        write_expr(out, child);
    }
}

fn write_expr(out: &mut String, expr: &Expr) {
    match expr {
        Expr::Number(n) => out.push_str(&fmt_number(*n)),
        Expr::Ref {
            name, subscript, ..
        } => {
            out.push_str(name);
            match subscript {
                Some(Subscript::Wildcard) => out.push_str("[*]"),
                Some(Subscript::Element(el)) => {
                    out.push('[');
                    out.push_str(el);
                    out.push(']');
                }
                None => {}
            }
        }
        Expr::Call { name, args, .. } => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
        Expr::Neg(inner) => {
            out.push('-');
            // parenthesize anything that binds looser than unary minus,
            // plus nested negation for readability
            let needs = prec(inner) < 4 || matches!(**inner, Expr::Neg(_));
            write_child(out, inner, needs);
        }
        Expr::Binary { op, lhs, rhs } => {
            let p = prec(expr);
            match op {
                BinaryOp::Pow => {
                    // right-associative; literal atoms only on the left
                    write_child(out, lhs, prec(lhs) <= p);
                    out.push_str(op_str(*op));
                    write_child(out, rhs, prec(rhs) < 4);
                }
                _ => {
                    // left-associative: equal precedence on the right needs
                    // parens to survive a reparse structurally; comparisons
                    // are non-associative, so both sides get them
                    let lhs_parens = prec(lhs) < p || (p == 1 && prec(lhs) == 1);
                    write_child(out, lhs, lhs_parens);
                    out.push(' ');
                    out.push_str(op_str(*op));
                    out.push(' ');
                    write_child(out, rhs, prec(rhs) <= p);
                }
            }
        }
        Expr::If { cond, then, els } => {
            out.push_str("if ");
            write_child(out, cond, matches!(**cond, Expr::If { .. }));
            out.push_str(" then ");
            write_child(out, then, matches!(**then, Expr::If { .. }));
            out.push_str(" else ");
            // bare trailing if keeps else-if chains flat
            write_expr(out, els);
        }
    }
}

/// Render one expression canonically (no enclosing declaration).
pub fn format_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr);
    out
}

fn write_dims(out: &mut String, dims: &[String]) {
    if let Some(d) = dims.first() {
        out.push('[');
        out.push_str(d);
        out.push(']');
    }
}

fn write_units(out: &mut String, units: &Option<String>) {
    if let Some(u) = units {
        out.push_str(" units \"");
        out.push_str(u);
        out.push('"');
    }
}

fn write_decl(out: &mut String, decl: &Decl) {
    match decl {
        Decl::Dimension(d) => {
            out.push_str("dimension ");
            out.push_str(&d.name);
            out.push_str(" { ");
            for (i, el) in d.elements.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(el);
            }
            out.push_str(" }\n");
        }
        Decl::Param(p) => {
            out.push_str("param ");
            out.push_str(&p.name);
            write_dims(out, &p.dims);
            out.push_str(" = ");
            match &p.value {
                ParamValue::Scalar(v) => out.push_str(&fmt_number(*v)),
                ParamValue::PerElement(entries) => {
                    out.push_str("{ ");
                    for (i, (el, v, _)) in entries.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        out.push_str(el);
                        out.push_str(": ");
                        out.push_str(&fmt_number(*v));
                    }
                    out.push_str(" }");
                }
            }
            write_units(out, &p.units);
            out.push('\n');
        }
        Decl::Lookup(l) => {
            out.push_str("lookup ");
            out.push_str(&l.name);
            out.push_str(" = [");
            for (i, (x, y)) in l.points.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push('(');
                out.push_str(&fmt_number(*x));
                out.push_str(", ");
                out.push_str(&fmt_number(*y));
                out.push(')');
            }
            out.push_str("]\n");
        }
        Decl::Var(v) => {
            out.push_str(match v.kind {
                VarKind::Auxiliary => "aux ",
                VarKind::Flow => "flow ",
            });
            out.push_str(&v.name);
            write_dims(out, &v.dims);
            out.push_str(" = ");
            write_expr(out, &v.equation);
            write_units(out, &v.units);
            out.push('\n');
        }
        Decl::Stock(s) => {
            out.push_str("stock ");
            out.push_str(&s.name);
            write_dims(out, &s.dims);
            out.push_str(" {\n  initial = ");
            write_expr(out, &s.initial);
            out.push('\n');
            if !s.inflows.is_empty() {
                out.push_str("  inflows = [");
                for (i, (name, _)) in s.inflows.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(name);
                }
                out.push_str("]\n");
            }
            if !s.outflows.is_empty() {
                out.push_str("  outflows = [");
                for (i, (name, _)) in s.outflows.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(name);
                }
                out.push_str("]\n");
            }
            if s.non_negative {
                out.push_str("  nonneg\n");
            }
            if let Some(u) = &s.units {
                out.push_str("  units \"");
                out.push_str(u);
                out.push_str("\"\n");
            }
            out.push_str("}\n");
        }
        Decl::Scenario(s) => {
            out.push_str("scenario ");
            out.push_str(&s.name);
            out.push_str(" {\n");
            for o in &s.overlays {
                out.push_str("  ");
                let mut target = String::new();
                target.push_str(&o.target);
                if let Some(el) = &o.element {
                    target.push('[');
                    target.push_str(el);
                    target.push(']');
                }
                match &o.shape {
                    OverlayShapeDecl::Switch { value } => {
                        out.push_str("switch ");
                        out.push_str(&target);
                        out.push_str(" = ");
                        out.push_str(&fmt_number(*value));
                    }
                    OverlayShapeDecl::Step { t0, value } => {
                        out.push_str("step ");
                        out.push_str(&target);
                        out.push_str(" at ");
                        out.push_str(&fmt_number(*t0));
                        out.push_str(" to ");
                        out.push_str(&fmt_number(*value));
                    }
                    OverlayShapeDecl::AddStep { t0, delta } => {
                        out.push_str("add ");
                        out.push_str(&target);
                        out.push_str(" at ");
                        out.push_str(&fmt_number(*t0));
                        out.push_str(" by ");
                        out.push_str(&fmt_number(*delta));
                    }
                    OverlayShapeDecl::ScaleStep { t0, factor } => {
                        out.push_str("scale ");
                        out.push_str(&target);
                        out.push_str(" at ");
                        out.push_str(&fmt_number(*t0));
                        out.push_str(" by ");
                        out.push_str(&fmt_number(*factor));
                    }
                    OverlayShapeDecl::Pulse { t0, width, height } => {
                        out.push_str("pulse ");
                        out.push_str(&target);
                        out.push_str(" at ");
                        out.push_str(&fmt_number(*t0));
                        out.push_str(" width ");
                        out.push_str(&fmt_number(*width));
                        out.push_str(" height ");
                        out.push_str(&fmt_number(*height));
                    }
                    OverlayShapeDecl::Ramp { t0, t1, slope } => {
                        out.push_str("ramp ");
                        out.push_str(&target);
                        out.push_str(" from ");
                        out.push_str(&fmt_number(*t0));
                        out.push_str(" to ");
                        out.push_str(&fmt_number(*t1));
                        out.push_str(" slope ");
                        out.push_str(&fmt_number(*slope));
                    }
                }
                out.push('\n');
            }
            out.push_str("}\n");
        }
    }
}

/// Whether two adjacent declarations stack without a blank line.
fn stacks_with(prev: &Decl, next: &Decl) -> bool {
    matches!(
        (prev, next),
        (Decl::Param(_), Decl::Param(_))
            | (Decl::Lookup(_), Decl::Lookup(_))
            | (Decl::Var(_), Decl::Var(_))
    )
}

/// Canonical pretty-print of a parsed file.
pub fn format(file: &SourceFile) -> String {
    let mut out = String::new();
    for (i, decl) in file.decls.iter().enumerate() {
        if i > 0 && !stacks_with(&file.decls[i - 1], decl) {
            out.push('\n');
        }
        write_decl(&mut out, decl);
    }
    out
}

/// Erase source positions so two parses can be compared structurally.
pub fn normalize_positions(file: &mut SourceFile) {
    fn norm_expr(e: &mut Expr) {
        match e {
            Expr::Number(_) => {}
            Expr::Ref { pos, .. } => *pos = Pos { line: 0, column: 0 },
            Expr::Call { pos, args, .. } => {
                *pos = Pos { line: 0, column: 0 };
                for a in args {
                    norm_expr(a);
                }
            }
            Expr::Neg(inner) => norm_expr(inner),
            Expr::Binary { lhs, rhs, .. } => {
                norm_expr(lhs);
                norm_expr(rhs);
            }
            Expr::If { cond, then, els } => {
                norm_expr(cond);
                norm_expr(then);
                norm_expr(els);
            }
        }
    }
    let zero = Pos { line: 0, column: 0 };
    for decl in &mut file.decls {
        match decl {
            Decl::Dimension(d) => d.pos = zero,
            Decl::Param(p) => {
                p.pos = zero;
                if let ParamValue::PerElement(entries) = &mut p.value {
                    for (_, _, pos) in entries {
                        *pos = zero;
                    }
                }
            }
            Decl::Lookup(l) => l.pos = zero,
            Decl::Var(v) => {
                v.pos = zero;
                norm_expr(&mut v.equation);
            }
            Decl::Stock(s) => {
                s.pos = zero;
                norm_expr(&mut s.initial);
                for (_, pos) in s.inflows.iter_mut().chain(s.outflows.iter_mut()) {
                    *pos = zero;
                }
            }
            Decl::Scenario(sc) => {
                sc.pos = zero;
                for o in &mut sc.overlays {
                    o.pos = zero;
                }
            }
        }
    }
    file.name = String::new();
}
