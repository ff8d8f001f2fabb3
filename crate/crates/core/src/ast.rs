//! Syntax tree for `.sdm` files, produced by the parser and consumed by the
//! resolver and the canonical formatter. Declaration order is preserved.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Subscript {
    /// `name[element]`
    Element(String),
    /// `name[*]` — the same element as the enclosing variable's instance
    Wildcard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    LtEq,
    Gt,
    GtEq,
    Eq,
    NotEq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Ref {
        name: String,
        subscript: Option<Subscript>,
        pos: Pos,
    },
    Call {
        name: String,
        args: Vec<Expr>,
        pos: Pos,
    },
    Neg(alloc::boxed::Box<Expr>),
    Binary {
        op: BinaryOp,
        lhs: alloc::boxed::Box<Expr>,
        rhs: alloc::boxed::Box<Expr>,
    },
    If {
        cond: alloc::boxed::Box<Expr>,
        then: alloc::boxed::Box<Expr>,
        els: alloc::boxed::Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionDecl {
    pub name: String,
    pub elements: Vec<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Scalar(f64),
    /// `{ element: value, ... }`
    PerElement(Vec<(String, f64, Pos)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub dims: Vec<String>,
    pub value: ParamValue,
    pub units: Option<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookupDecl {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Auxiliary,
    Flow,
}

/// An `aux` or `flow` declaration.
#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub kind: VarKind,
    pub name: String,
    pub dims: Vec<String>,
    pub equation: Expr,
    pub units: Option<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StockDecl {
    pub name: String,
    pub dims: Vec<String>,
    pub initial: Expr,
    pub inflows: Vec<(String, Pos)>,
    pub outflows: Vec<(String, Pos)>,
    pub non_negative: bool,
    pub units: Option<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OverlayShapeDecl {
    /// `step <target> at <t0> to <value>`
    Step { t0: f64, value: f64 },
    /// `add <target> at <t0> by <delta>`
    AddStep { t0: f64, delta: f64 },
    /// `scale <target> at <t0> by <factor>`
    ScaleStep { t0: f64, factor: f64 },
    /// `pulse <target> at <t0> width <w> height <h>`
    Pulse { t0: f64, width: f64, height: f64 },
    /// `ramp <target> from <t0> to <t1> slope <s>`
    Ramp { t0: f64, t1: f64, slope: f64 },
    /// `switch <target> = <value>` — applies from the start of the run
    Switch { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlayDecl {
    pub target: String,
    pub element: Option<String>,
    pub shape: OverlayShapeDecl,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDecl {
    pub name: String,
    pub overlays: Vec<OverlayDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Dimension(DimensionDecl),
    Param(ParamDecl),
    Lookup(LookupDecl),
    Var(VarDecl),
    Stock(StockDecl),
    Scenario(ScenarioDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Dimension(d) => &d.name,
            Decl::Param(d) => &d.name,
            Decl::Lookup(d) => &d.name,
            Decl::Var(d) => &d.name,
            Decl::Stock(d) => &d.name,
            Decl::Scenario(d) => &d.name,
        }
    }

    pub fn pos(&self) -> Pos {
        match self {
            Decl::Dimension(d) => d.pos,
            Decl::Param(d) => d.pos,
            Decl::Lookup(d) => d.pos,
            Decl::Var(d) => d.pos,
            Decl::Stock(d) => d.pos,
            Decl::Scenario(d) => d.pos,
        }
    }
}

/// One parsed source file.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceFile {
    pub name: String,
    pub decls: Vec<Decl>,
}
