//! Property tests: formatter round-trips, lookup interpolation laws, and
//! safe division totality.

use proptest::prelude::*;

use sdflow_core::ast::{BinaryOp, Decl, Expr, ParamValue, Pos, Subscript, VarKind};
use sdflow_core::format::{format, format_expr, normalize_positions};
use sdflow_core::lookup::LookupTable;
use sdflow_core::parser::parse_text;
use sdflow_core::{eval_lookup, safe_divide};

fn pos() -> Pos {
    Pos { line: 0, column: 0 }
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0f64..1e6).prop_map(Expr::Number),
        prop_oneof![Just("a"), Just("b"), Just("c")].prop_map(|n| Expr::Ref {
            name: n.into(),
            subscript: None,
            pos: pos(),
        }),
        prop_oneof![Just("a"), Just("b")].prop_map(|n| Expr::Ref {
            name: n.into(),
            subscript: Some(Subscript::Wildcard),
            pos: pos(),
        }),
        Just(Expr::Ref {
            name: "c".into(),
            subscript: Some(Subscript::Element("x".into())),
            pos: pos(),
        }),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let op = prop_oneof![
        Just(BinaryOp::Add),
        Just(BinaryOp::Sub),
        Just(BinaryOp::Mul),
        Just(BinaryOp::Div),
        Just(BinaryOp::Pow),
        Just(BinaryOp::Lt),
        Just(BinaryOp::LtEq),
        Just(BinaryOp::Gt),
        Just(BinaryOp::GtEq),
        Just(BinaryOp::Eq),
        Just(BinaryOp::NotEq),
    ];
    leaf().prop_recursive(4, 64, 3, move |inner| {
        prop_oneof![
            (op.clone(), inner.clone(), inner.clone()).prop_map(|(op, lhs, rhs)| Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            }),
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(c, t, e)| Expr::If {
                cond: Box::new(c),
                then: Box::new(t),
                els: Box::new(e),
            }),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(a, b, c)| Expr::Call {
                name: "safe_divide".into(),
                args: vec![a, b, c],
                pos: pos(),
            }),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Call {
                name: "min".into(),
                args: vec![a, b],
                pos: pos(),
            }),
            inner.prop_map(|a| Expr::Call {
                name: "lk".into(),
                args: vec![a],
                pos: pos(),
            }),
        ]
    })
}

fn strip(expr: &Expr) -> Expr {
    let mut file = sdflow_core::ast::SourceFile {
        name: String::new(),
        decls: vec![Decl::Var(sdflow_core::ast::VarDecl {
            kind: VarKind::Auxiliary,
            name: "root".into(),
            dims: vec![],
            equation: expr.clone(),
            units: None,
            pos: pos(),
        })],
    };
    normalize_positions(&mut file);
    match file.decls.pop().unwrap() {
        Decl::Var(v) => v.equation,
        _ => unreachable!(),
    }
}

proptest! {
    /// format -> parse reproduces the expression tree structurally.
    #[test]
    fn formatted_expression_reparses_to_same_tree(e in expr()) {
        let text = format!("aux root = {}", format_expr(&e));
        let mut parsed = parse_text("prop.sdm", &text).unwrap();
        normalize_positions(&mut parsed);
        let got = match parsed.decls.pop().unwrap() {
            Decl::Var(v) => v.equation,
            _ => unreachable!(),
        };
        prop_assert_eq!(got, strip(&e));
    }

    /// One formatting pass is a fixed point.
    #[test]
    fn format_is_idempotent_on_generated_files(e1 in expr(), e2 in expr(), v in 0.0f64..1e3) {
        let text = format!(
            "dimension g {{ x, y }}\nparam p[g] = {{ x: {v}, y: 2 }}\nlookup lk = [(0, 0), (1, 1)]\naux a[g] = {}\nflow b[g] = {}\nstock s[g] {{\n  initial = p[*]\n  inflows = [b]\n  nonneg\n}}",
            format_expr(&e1),
            format_expr(&e2),
        );
        let once = format(&parse_text("prop.sdm", &text).unwrap());
        let twice = format(&parse_text("prop.sdm", &once).unwrap());
        prop_assert_eq!(once, twice);
    }

    /// Non-decreasing tables stay non-decreasing through interpolation.
    #[test]
    fn lookup_preserves_monotonicity(
        mut xs in proptest::collection::vec(-1e3f64..1e3, 2..8),
        mut dys in proptest::collection::vec(0.0f64..10.0, 2..8),
        probes in proptest::collection::vec(-2e3f64..2e3, 8),
    ) {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        prop_assume!(xs.len() >= 2);
        dys.truncate(xs.len());
        while dys.len() < xs.len() { dys.push(0.5); }
        let mut y = 0.0;
        let points: Vec<(f64, f64)> = xs.iter().zip(&dys).map(|(&x, &dy)| {
            y += dy;
            (x, y)
        }).collect();
        let table = LookupTable::new(points).unwrap();
        prop_assert!(table.is_non_decreasing());
        let mut sorted = probes.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let values: Vec<f64> = sorted.iter().map(|&x| eval_lookup(&table, x)).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
    }

    /// Interpolation is total and stays inside the y envelope.
    #[test]
    fn lookup_clamps_to_envelope(x in -1e6f64..1e6) {
        let table = LookupTable::new(vec![(0.0, 0.5), (0.5, 0.9), (1.0, 1.0)]).unwrap();
        let y = eval_lookup(&table, x);
        prop_assert!((0.5..=1.0).contains(&y));
    }

    /// safe_divide never produces non-finite output from finite input.
    #[test]
    fn safe_divide_is_total(n in -1e9f64..1e9, d in -1e9f64..1e9, f in -1e3f64..1e3) {
        prop_assert!(safe_divide(n, d, f).is_finite());
    }
}
