//! Recursive-descent parser for `.sdm` files.
//!
//! On error the parser records a diagnostic and resynchronizes at the next
//! top-level declaration keyword, so one bad declaration does not hide
//! problems in the rest of the file.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::*;
use crate::diag::Diagnostic;
use crate::token::{Token, TokenKind};

const DECL_KEYWORDS: &[&str] = &[
    "dimension",
    "param",
    "lookup",
    "aux",
    "flow",
    "stock",
    "scenario",
];

struct Parser<'a> {
    source_name: &'a str,
    tokens: &'a [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
}

struct ParseAbort;

type PResult<T> = Result<T, ParseAbort>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> Pos {
        match self.peek() {
            Some(t) => Pos {
                line: t.line,
                column: t.column,
            },
            None => self
                .tokens
                .last()
                .map(|t| Pos {
                    line: t.line,
                    column: t.column,
                })
                .unwrap_or(Pos { line: 1, column: 1 }),
        }
    }

    fn error_here(&mut self, message: String) -> ParseAbort {
        let pos = self.here();
        self.diags
            .push(Diagnostic::error(self.source_name, pos.line, pos.column, message));
        ParseAbort
    }

    fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { kind: TokenKind::Ident(s), .. }) if s == word)
    }

    fn at_decl_keyword(&self) -> bool {
        matches!(self.peek(), Some(Token { kind: TokenKind::Ident(s), .. })
            if DECL_KEYWORDS.contains(&s.as_str()))
    }

    fn expect_kind(&mut self, kind: &TokenKind, what: &str) -> PResult<&'a Token> {
        match self.peek() {
            Some(t) if &t.kind == kind => Ok(self.bump().unwrap()),
            Some(t) => {
                let msg = alloc::format!("expected {what}, found {}", t.kind.describe());
                Err(self.error_here(msg))
            }
            None => {
                let msg = alloc::format!("expected {what}, found end of file");
                Err(self.error_here(msg))
            }
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Ident(s),
                line,
                column,
            }) => {
                let out = (
                    s.clone(),
                    Pos {
                        line: *line,
                        column: *column,
                    },
                );
                self.pos += 1;
                Ok(out)
            }
            Some(t) => {
                let msg = alloc::format!("expected {what}, found {}", t.kind.describe());
                Err(self.error_here(msg))
            }
            None => {
                let msg = alloc::format!("expected {what}, found end of file");
                Err(self.error_here(msg))
            }
        }
    }

    fn expect_keyword(&mut self, word: &str) -> PResult<()> {
        if self.at_ident(word) {
            self.pos += 1;
            Ok(())
        } else {
            let found = match self.peek() {
                Some(t) => t.kind.describe(),
                None => "end of file".to_string(),
            };
            let msg = alloc::format!("expected `{word}`, found {found}");
            Err(self.error_here(msg))
        }
    }

    /// Number literal with optional leading minus (used in lookup points,
    /// parameter values, and overlay arguments).
    fn expect_number(&mut self, what: &str) -> PResult<f64> {
        let neg = if matches!(self.peek(), Some(Token { kind: TokenKind::Minus, .. })) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.peek() {
            Some(Token {
                kind: TokenKind::Number(n),
                ..
            }) => {
                let v = *n;
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            Some(t) => {
                let msg = alloc::format!("expected {what}, found {}", t.kind.describe());
                Err(self.error_here(msg))
            }
            None => {
                let msg = alloc::format!("expected {what}, found end of file");
                Err(self.error_here(msg))
            }
        }
    }

    /// Skip ahead to the next top-level declaration keyword.
    fn resync(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            match &t.kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => {
                    depth = depth.saturating_sub(1);
                    self.pos += 1;
                    if depth == 0 {
                        return;
                    }
                    continue;
                }
                TokenKind::Ident(s) if depth == 0 && DECL_KEYWORDS.contains(&s.as_str()) => {
                    return;
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    // ---- declarations ----

    fn dims(&mut self) -> PResult<Vec<String>> {
        let mut dims = Vec::new();
        if matches!(self.peek(), Some(Token { kind: TokenKind::LBracket, .. })) {
            self.pos += 1;
            loop {
                let (name, _) = self.expect_ident("dimension name")?;
                dims.push(name);
                match self.peek().map(|t| &t.kind) {
                    Some(TokenKind::Comma) => {
                        self.pos += 1;
                    }
                    Some(TokenKind::RBracket) => {
                        self.pos += 1;
                        break;
                    }
                    _ => {
                        return Err(self.error_here("expected `,` or `]` in dimension list".into()));
                    }
                }
            }
        }
        Ok(dims)
    }

    fn units(&mut self) -> PResult<Option<String>> {
        if self.at_ident("units") {
            self.pos += 1;
            match self.peek() {
                Some(Token {
                    kind: TokenKind::Str(s),
                    ..
                }) => {
                    let s = s.clone();
                    self.pos += 1;
                    Ok(Some(s))
                }
                _ => Err(self.error_here("expected string after `units`".into())),
            }
        } else {
            Ok(None)
        }
    }

    fn dimension_decl(&mut self, pos: Pos) -> PResult<Decl> {
        let (name, _) = self.expect_ident("dimension name")?;
        self.expect_kind(&TokenKind::LBrace, "`{`")?;
        let mut elements = Vec::new();
        loop {
            let (el, _) = self.expect_ident("element name")?;
            elements.push(el);
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Comma) => {
                    self.pos += 1;
                }
                Some(TokenKind::RBrace) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error_here("expected `,` or `}` in dimension".into())),
            }
        }
        Ok(Decl::Dimension(DimensionDecl { name, elements, pos }))
    }

    fn param_decl(&mut self, pos: Pos) -> PResult<Decl> {
        let (name, _) = self.expect_ident("parameter name")?;
        let dims = self.dims()?;
        self.expect_kind(&TokenKind::Eq, "`=`")?;
        let value = if matches!(self.peek(), Some(Token { kind: TokenKind::LBrace, .. })) {
            self.pos += 1;
            let mut entries = Vec::new();
            loop {
                let (el, epos) = self.expect_ident("element name")?;
                self.expect_kind(&TokenKind::Colon, "`:`")?;
                let v = self.expect_number("value")?;
                entries.push((el, v, epos));
                match self.peek().map(|t| &t.kind) {
                    Some(TokenKind::Comma) => {
                        self.pos += 1;
                    }
                    Some(TokenKind::RBrace) => {
                        self.pos += 1;
                        break;
                    }
                    _ => {
                        return Err(
                            self.error_here("expected `,` or `}` in parameter values".into())
                        );
                    }
                }
            }
            ParamValue::PerElement(entries)
        } else {
            ParamValue::Scalar(self.expect_number("parameter value")?)
        };
        let units = self.units()?;
        Ok(Decl::Param(ParamDecl {
            name,
            dims,
            value,
            units,
            pos,
        }))
    }

    fn lookup_decl(&mut self, pos: Pos) -> PResult<Decl> {
        let (name, _) = self.expect_ident("lookup name")?;
        self.expect_kind(&TokenKind::Eq, "`=`")?;
        self.expect_kind(&TokenKind::LBracket, "`[`")?;
        let mut points = Vec::new();
        loop {
            self.expect_kind(&TokenKind::LParen, "`(`")?;
            let x = self.expect_number("x value")?;
            self.expect_kind(&TokenKind::Comma, "`,`")?;
            let y = self.expect_number("y value")?;
            self.expect_kind(&TokenKind::RParen, "`)`")?;
            points.push((x, y));
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Comma) => {
                    self.pos += 1;
                }
                Some(TokenKind::RBracket) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error_here("expected `,` or `]` in lookup points".into())),
            }
        }
        Ok(Decl::Lookup(LookupDecl { name, points, pos }))
    }

    fn var_decl(&mut self, kind: VarKind, pos: Pos) -> PResult<Decl> {
        let (name, _) = self.expect_ident("variable name")?;
        let dims = self.dims()?;
        self.expect_kind(&TokenKind::Eq, "`=`")?;
        let equation = self.expr()?;
        let units = self.units()?;
        Ok(Decl::Var(VarDecl {
            kind,
            name,
            dims,
            equation,
            units,
            pos,
        }))
    }

    fn name_list(&mut self) -> PResult<Vec<(String, Pos)>> {
        self.expect_kind(&TokenKind::LBracket, "`[`")?;
        let mut names = Vec::new();
        if matches!(self.peek(), Some(Token { kind: TokenKind::RBracket, .. })) {
            self.pos += 1;
            return Ok(names);
        }
        loop {
            let (name, pos) = self.expect_ident("flow name")?;
            names.push((name, pos));
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Comma) => {
                    self.pos += 1;
                }
                Some(TokenKind::RBracket) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error_here("expected `,` or `]` in flow list".into())),
            }
        }
        Ok(names)
    }

    fn stock_decl(&mut self, pos: Pos) -> PResult<Decl> {
        let (name, _) = self.expect_ident("stock name")?;
        let dims = self.dims()?;
        self.expect_kind(&TokenKind::LBrace, "`{`")?;

        let mut initial: Option<Expr> = None;
        let mut inflows: Option<Vec<(String, Pos)>> = None;
        let mut outflows: Option<Vec<(String, Pos)>> = None;
        let mut non_negative = false;
        let mut units = None;

        loop {
            match self.peek() {
                Some(Token {
                    kind: TokenKind::RBrace,
                    ..
                }) => {
                    self.pos += 1;
                    break;
                }
                Some(Token {
                    kind: TokenKind::Ident(word),
                    ..
                }) => match word.as_str() {
                    "initial" => {
                        if initial.is_some() {
                            return Err(self.error_here("duplicate `initial` in stock".into()));
                        }
                        self.pos += 1;
                        self.expect_kind(&TokenKind::Eq, "`=`")?;
                        initial = Some(self.expr()?);
                    }
                    "inflows" => {
                        if inflows.is_some() {
                            return Err(self.error_here("duplicate `inflows` in stock".into()));
                        }
                        self.pos += 1;
                        self.expect_kind(&TokenKind::Eq, "`=`")?;
                        inflows = Some(self.name_list()?);
                    }
                    "outflows" => {
                        if outflows.is_some() {
                            return Err(self.error_here("duplicate `outflows` in stock".into()));
                        }
                        self.pos += 1;
                        self.expect_kind(&TokenKind::Eq, "`=`")?;
                        outflows = Some(self.name_list()?);
                    }
                    "nonneg" => {
                        self.pos += 1;
                        non_negative = true;
                    }
                    "units" => {
                        units = self.units()?;
                    }
                    _ => {
                        let msg = alloc::format!(
                            "expected `initial`, `inflows`, `outflows`, `nonneg`, or `}}` in stock, found identifier `{word}`"
                        );
                        return Err(self.error_here(msg));
                    }
                },
                _ => {
                    return Err(self.error_here("expected `}` at end of stock block".into()));
                }
            }
        }

        let initial = match initial {
            Some(e) => e,
            None => {
                let msg = alloc::format!("stock `{name}` is missing an `initial` expression");
                self.diags.push(Diagnostic::error(
                    self.source_name,
                    pos.line,
                    pos.column,
                    msg,
                ));
                return Err(ParseAbort);
            }
        };

        Ok(Decl::Stock(StockDecl {
            name,
            dims,
            initial,
            inflows: inflows.unwrap_or_default(),
            outflows: outflows.unwrap_or_default(),
            non_negative,
            units,
            pos,
        }))
    }

    fn overlay_target(&mut self) -> PResult<(String, Option<String>)> {
        let (target, _) = self.expect_ident("parameter name")?;
        let element = if matches!(self.peek(), Some(Token { kind: TokenKind::LBracket, .. })) {
            self.pos += 1;
            let (el, _) = self.expect_ident("element name")?;
            self.expect_kind(&TokenKind::RBracket, "`]`")?;
            Some(el)
        } else {
            None
        };
        Ok((target, element))
    }

    fn scenario_decl(&mut self, pos: Pos) -> PResult<Decl> {
        let (name, _) = self.expect_ident("scenario name")?;
        self.expect_kind(&TokenKind::LBrace, "`{`")?;
        let mut overlays = Vec::new();
        loop {
            let opos = self.here();
            match self.peek() {
                Some(Token {
                    kind: TokenKind::RBrace,
                    ..
                }) => {
                    self.pos += 1;
                    break;
                }
                Some(Token {
                    kind: TokenKind::Ident(word),
                    ..
                }) => {
                    let word = word.clone();
                    self.pos += 1;
                    let (target, element) = self.overlay_target()?;
                    let shape = match word.as_str() {
                        "switch" => {
                            self.expect_kind(&TokenKind::Eq, "`=`")?;
                            let value = self.expect_number("value")?;
                            OverlayShapeDecl::Switch { value }
                        }
                        "step" => {
                            self.expect_keyword("at")?;
                            let t0 = self.expect_number("time")?;
                            self.expect_keyword("to")?;
                            let value = self.expect_number("value")?;
                            OverlayShapeDecl::Step { t0, value }
                        }
                        "add" => {
                            self.expect_keyword("at")?;
                            let t0 = self.expect_number("time")?;
                            self.expect_keyword("by")?;
                            let delta = self.expect_number("delta")?;
                            OverlayShapeDecl::AddStep { t0, delta }
                        }
                        "scale" => {
                            self.expect_keyword("at")?;
                            let t0 = self.expect_number("time")?;
                            self.expect_keyword("by")?;
                            let factor = self.expect_number("factor")?;
                            OverlayShapeDecl::ScaleStep { t0, factor }
                        }
                        "pulse" => {
                            self.expect_keyword("at")?;
                            let t0 = self.expect_number("time")?;
                            self.expect_keyword("width")?;
                            let width = self.expect_number("width")?;
                            self.expect_keyword("height")?;
                            let height = self.expect_number("height")?;
                            OverlayShapeDecl::Pulse { t0, width, height }
                        }
                        "ramp" => {
                            self.expect_keyword("from")?;
                            let t0 = self.expect_number("time")?;
                            self.expect_keyword("to")?;
                            let t1 = self.expect_number("time")?;
                            self.expect_keyword("slope")?;
                            let slope = self.expect_number("slope")?;
                            OverlayShapeDecl::Ramp { t0, t1, slope }
                        }
                        other => {
                            let msg = alloc::format!(
                                "expected `switch`, `step`, `add`, `scale`, `pulse`, or `ramp`, found `{other}`"
                            );
                            self.diags.push(Diagnostic::error(
                                self.source_name,
                                opos.line,
                                opos.column,
                                msg,
                            ));
                            return Err(ParseAbort);
                        }
                    };
                    overlays.push(OverlayDecl {
                        target,
                        element,
                        shape,
                        pos: opos,
                    });
                }
                _ => {
                    return Err(self.error_here("expected `}` at end of scenario block".into()));
                }
            }
        }
        Ok(Decl::Scenario(ScenarioDecl {
            name,
            overlays,
            pos,
        }))
    }

    fn decl(&mut self) -> PResult<Decl> {
        let pos = self.here();
        let (word, _) = self.expect_ident("declaration keyword")?;
        match word.as_str() {
            "dimension" => self.dimension_decl(pos),
            "param" => self.param_decl(pos),
            "lookup" => self.lookup_decl(pos),
            "aux" => self.var_decl(VarKind::Auxiliary, pos),
            "flow" => self.var_decl(VarKind::Flow, pos),
            "stock" => self.stock_decl(pos),
            "scenario" => self.scenario_decl(pos),
            other => {
                let msg = alloc::format!(
                    "expected `dimension`, `param`, `lookup`, `aux`, `flow`, `stock`, or `scenario`, found `{other}`"
                );
                self.diags
                    .push(Diagnostic::error(self.source_name, pos.line, pos.column, msg));
                Err(ParseAbort)
            }
        }
    }

    // ---- expressions ----
    //
    // Precedence, tightest first: `^`, unary `-`, `* /`, `+ -`, comparisons.
    // `if c then a else b` binds loosest and nests in its branches.

    fn expr(&mut self) -> PResult<Expr> {
        if self.at_ident("if") {
            self.pos += 1;
            let cond = self.expr()?;
            self.expect_keyword("then")?;
            let then = self.expr()?;
            self.expect_keyword("else")?;
            let els = self.expr()?;
            return Ok(Expr::If {
                cond: Box::new(cond),
                then: Box::new(then),
                els: Box::new(els),
            });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.add_sub()?;
        let op = match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Lt) => BinaryOp::Lt,
            Some(TokenKind::LtEq) => BinaryOp::LtEq,
            Some(TokenKind::Gt) => BinaryOp::Gt,
            Some(TokenKind::GtEq) => BinaryOp::GtEq,
            Some(TokenKind::EqEq) => BinaryOp::Eq,
            Some(TokenKind::NotEq) => BinaryOp::NotEq,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.add_sub()?;
        Ok(Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        })
    }

    fn add_sub(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_div()?;
        loop {
            let op = match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Plus) => BinaryOp::Add,
                Some(TokenKind::Minus) => BinaryOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.mul_div()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn mul_div(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Star) => BinaryOp::Mul,
                Some(TokenKind::Slash) => BinaryOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if matches!(self.peek(), Some(Token { kind: TokenKind::Minus, .. })) {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token { kind: TokenKind::Caret, .. })) {
            self.pos += 1;
            // right-associative; exponent may carry a unary minus
            let exp = self.unary()?;
            return Ok(Expr::Binary {
                op: BinaryOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exp),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Number(n),
                ..
            }) => {
                let v = *n;
                self.pos += 1;
                Ok(Expr::Number(v))
            }
            Some(Token {
                kind: TokenKind::LParen,
                ..
            }) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_kind(&TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            Some(Token {
                kind: TokenKind::Ident(name),
                line,
                column,
            }) => {
                let pos = Pos {
                    line: *line,
                    column: *column,
                };
                let name = name.clone();
                if name == "if" || name == "then" || name == "else" {
                    return Err(self.error_here(alloc::format!(
                        "`{name}` is not valid here; parenthesize conditional expressions"
                    )));
                }
                if DECL_KEYWORDS.contains(&name.as_str()) {
                    return Err(self.error_here(alloc::format!(
                        "expected expression, found keyword `{name}`"
                    )));
                }
                self.pos += 1;
                match self.peek().map(|t| &t.kind) {
                    Some(TokenKind::LParen) => {
                        self.pos += 1;
                        let mut args = Vec::new();
                        if matches!(self.peek(), Some(Token { kind: TokenKind::RParen, .. })) {
                            self.pos += 1;
                        } else {
                            loop {
                                args.push(self.expr()?);
                                match self.peek().map(|t| &t.kind) {
                                    Some(TokenKind::Comma) => {
                                        self.pos += 1;
                                    }
                                    Some(TokenKind::RParen) => {
                                        self.pos += 1;
                                        break;
                                    }
                                    _ => {
                                        return Err(self.error_here(
                                            "expected `,` or `)` in argument list".into(),
                                        ));
                                    }
                                }
                            }
                        }
                        Ok(Expr::Call { name, args, pos })
                    }
                    Some(TokenKind::LBracket) => {
                        self.pos += 1;
                        let subscript = match self.peek() {
                            Some(Token {
                                kind: TokenKind::Star,
                                ..
                            }) => {
                                self.pos += 1;
                                Subscript::Wildcard
                            }
                            Some(Token {
                                kind: TokenKind::Ident(el),
                                ..
                            }) => {
                                let el = el.clone();
                                self.pos += 1;
                                Subscript::Element(el)
                            }
                            _ => {
                                return Err(self.error_here(
                                    "expected element name or `*` in subscript".into(),
                                ));
                            }
                        };
                        self.expect_kind(&TokenKind::RBracket, "`]`")?;
                        Ok(Expr::Ref {
                            name,
                            subscript: Some(subscript),
                            pos,
                        })
                    }
                    _ => Ok(Expr::Ref {
                        name,
                        subscript: None,
                        pos,
                    }),
                }
            }
            Some(t) => {
                let msg = alloc::format!("expected expression, found {}", t.kind.describe());
                Err(self.error_here(msg))
            }
            None => Err(self.error_here("expected expression, found end of file".into())),
        }
    }
}

/// Parse a token stream into a [`SourceFile`], collecting all diagnostics.
pub fn parse(source_name: &str, tokens: &[Token]) -> Result<SourceFile, Vec<Diagnostic>> {
    let mut p = Parser {
        source_name,
        tokens,
        pos: 0,
        diags: Vec::new(),
    };

    let mut decls = Vec::new();
    while p.peek().is_some() {
        match p.decl() {
            Ok(d) => decls.push(d),
            Err(ParseAbort) => {
                // move past the offending token so resync makes progress
                if !p.at_decl_keyword() {
                    p.bump();
                }
                p.resync();
            }
        }
    }

    if p.diags.is_empty() {
        Ok(SourceFile {
            name: String::from(source_name),
            decls,
        })
    } else {
        Err(p.diags)
    }
}

/// Lex and parse in one step.
pub fn parse_text(source_name: &str, text: &str) -> Result<SourceFile, Vec<Diagnostic>> {
    let tokens = crate::lexer::tokenize(source_name, text).map_err(|d| alloc::vec![d])?;
    parse(source_name, &tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_stock_file() {
        let file = parse_text(
            "m.sdm",
            "flow f = 3\nstock S { initial = 0 inflows = [f] }",
        )
        .unwrap();
        assert_eq!(file.decls.len(), 2);
        match &file.decls[1] {
            Decl::Stock(s) => {
                assert_eq!(s.name, "S");
                assert_eq!(s.inflows.len(), 1);
                assert!(!s.non_negative);
            }
            other => panic!("expected stock, got {other:?}"),
        }
    }

    #[test]
    fn missing_brace_single_error() {
        let errs = parse_text("m.sdm", "stock S { initial = 0\n").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("`}`"), "{}", errs[0].message);
    }

    #[test]
    fn recovers_at_decl_boundary() {
        let errs = parse_text("m.sdm", "aux a = * 2\naux b = )\naux c = 1").unwrap_err();
        assert_eq!(errs.len(), 2);
        assert_eq!(errs[0].line, 1);
        assert_eq!(errs[1].line, 2);
    }

    #[test]
    fn precedence_shape() {
        let file = parse_text("m.sdm", "aux a = 1 + 2 * 3").unwrap();
        match &file.decls[0] {
            Decl::Var(v) => match &v.equation {
                Expr::Binary { op: BinaryOp::Add, rhs, .. } => {
                    assert!(matches!(**rhs, Expr::Binary { op: BinaryOp::Mul, .. }));
                }
                other => panic!("unexpected shape {other:?}"),
            },
            _ => unreachable!(),
        }
    }

    #[test]
    fn unary_minus_and_power() {
        // `^` binds tighter than unary minus: -2^2 == -(2^2)
        let file = parse_text("m.sdm", "aux a = -2^2").unwrap();
        match &file.decls[0] {
            Decl::Var(v) => assert!(matches!(v.equation, Expr::Neg(_))),
            _ => unreachable!(),
        }
    }

    #[test]
    fn if_nests_in_else() {
        let file =
            parse_text("m.sdm", "aux a = if x > 1 then 1 else if x > 0 then 2 else 3").unwrap();
        match &file.decls[0] {
            Decl::Var(v) => match &v.equation {
                Expr::If { els, .. } => assert!(matches!(**els, Expr::If { .. })),
                other => panic!("unexpected {other:?}"),
            },
            _ => unreachable!(),
        }
    }

    #[test]
    fn scenario_overlays() {
        let file = parse_text(
            "s.sdm",
            "scenario boost {\n  scale rate at 5 by 1.15\n  switch mode = 2\n  ramp k from 1 to 4 slope -0.5\n}",
        )
        .unwrap();
        match &file.decls[0] {
            Decl::Scenario(s) => {
                assert_eq!(s.name, "boost");
                assert_eq!(s.overlays.len(), 3);
                assert!(matches!(
                    s.overlays[2].shape,
                    OverlayShapeDecl::Ramp { slope, .. } if slope == -0.5
                ));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn subscripted_refs() {
        let file = parse_text("m.sdm", "aux a[g] = b[*] + c[one]").unwrap();
        match &file.decls[0] {
            Decl::Var(v) => {
                assert_eq!(v.dims, alloc::vec![String::from("g")]);
            }
            _ => unreachable!(),
        }
    }
}
