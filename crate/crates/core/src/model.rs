//! Resolved model definition: the validated output of the language front end
//! and the input to [`crate::compile`].

use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::Expr;
use crate::lookup::LookupTable;
use crate::scenario::Scenario;

/// A subscript dimension, e.g. `group { blackAmericans, whiteAmericans }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dimension {
    pub name: String,
    pub elements: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Stock,
    Flow,
    Auxiliary,
    Parameter,
}

impl VarKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VarKind::Stock => "stock",
            VarKind::Flow => "flow",
            VarKind::Auxiliary => "aux",
            VarKind::Parameter => "param",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VarPayload {
    /// Default values, one per instance (see [`ModelDefinition::instance_count`]).
    Parameter { values: Vec<f64> },
    Equation { equation: Expr },
    Stock {
        initial: Expr,
        inflows: Vec<String>,
        outflows: Vec<String>,
        non_negative: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableDef {
    pub name: String,
    pub kind: VarKind,
    /// Index into [`ModelDefinition::dimensions`]; `None` for scalars.
    pub dim: Option<usize>,
    pub units: Option<String>,
    pub payload: VarPayload,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookupDef {
    pub name: String,
    pub table: LookupTable,
}

/// A fully resolved model: every reference checked, dimension usage
/// validated, lookup tables well formed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDefinition {
    pub dimensions: Vec<Dimension>,
    /// Declaration order preserved.
    pub variables: Vec<VariableDef>,
    pub lookups: Vec<LookupDef>,
    pub scenarios: Vec<Scenario>,
}

impl ModelDefinition {
    pub fn variable(&self, name: &str) -> Option<&VariableDef> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn scenario(&self, name: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    /// Number of instances a variable expands to (1 for scalars, element
    /// count for subscripted variables).
    pub fn instance_count(&self, var: &VariableDef) -> usize {
        match var.dim {
            Some(d) => self.dimensions[d].elements.len(),
            None => 1,
        }
    }
}
