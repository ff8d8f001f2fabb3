//! Compilation: expands subscripted variables into concrete instances,
//! lowers equations to offset-based expressions, and builds the evaluation
//! orders the simulator runs.
//!
//! Two dependency orders are produced: the runtime order (auxiliaries and
//! flows, stocks and parameters acting as sources) and the initialization
//! order (everything, with stock initial expressions allowed to reference
//! flows and auxiliaries evaluated at the start time).

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::{Expr, Subscript};
use crate::expr::LoweredExpr;
use crate::lookup::LookupTable;
use crate::model::{Dimension, ModelDefinition, VarKind, VarPayload};
use crate::resolve::TIME_NAME;
use crate::scenario::OverlayShape;

/// Slab offset of the simulation clock.
pub const TIME_OFFSET: usize = 0;

#[derive(Debug, Clone, PartialEq)]
pub enum CompileError {
    /// Instantaneous algebraic cycle among auxiliaries/flows (or, with
    /// `at_initial_time`, among initial-value expressions).
    Cycle {
        names: Vec<String>,
        at_initial_time: bool,
    },
    /// A variable was indexed by a dimension it does not declare.
    DimensionMismatch { name: String, detail: String },
}

impl core::fmt::Display for CompileError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CompileError::Cycle {
                names,
                at_initial_time,
            } => {
                if *at_initial_time {
                    write!(f, "cycle in initial values: ")?;
                } else {
                    write!(f, "algebraic cycle: ")?;
                }
                for (i, n) in names.iter().enumerate() {
                    if i > 0 {
                        write!(f, " -> ")?;
                    }
                    write!(f, "{n}")?;
                }
                Ok(())
            }
            CompileError::DimensionMismatch { name, detail } => {
                write!(f, "dimension mismatch on `{name}`: {detail}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceRole {
    Parameter {
        base_value: f64,
        /// Timed overlays, applied in order on top of the base value.
        overlays: Vec<OverlayShape>,
    },
    Equation {
        expr: LoweredExpr,
    },
    Stock {
        initial: LoweredExpr,
        /// Slab offsets of this stock's inflow/outflow instances.
        inflows: Vec<usize>,
        outflows: Vec<usize>,
        non_negative: bool,
    },
}

/// One concrete variable instance (a scalar variable, or one element of a
/// subscripted variable). Instance `i` lives at slab offset `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// Display name: `var` or `var[element]`.
    pub name: String,
    pub base: String,
    /// Element index within the variable's dimension.
    pub element: Option<usize>,
    pub kind: VarKind,
    pub role: InstanceRole,
}

/// A validated, dimension-expanded, topologically ordered evaluation plan.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledModel {
    pub dimensions: Vec<Dimension>,
    pub instances: Vec<Instance>,
    pub tables: Vec<LookupTable>,
    /// Names of the lookup tables, aligned with `tables`.
    pub table_names: Vec<String>,
    /// Instance indices of auxiliaries and flows, dependency-ordered.
    pub runtime_order: Vec<usize>,
    /// Instance indices of every variable in initialization order.
    pub initial_order: Vec<usize>,
}

impl CompiledModel {
    pub fn n_slots(&self) -> usize {
        self.instances.len() + 1
    }

    pub fn offset(&self, instance_index: usize) -> usize {
        instance_index + 1
    }

    /// Find an instance index by display name (`var` or `var[element]`).
    pub fn instance_index(&self, name: &str) -> Option<usize> {
        self.instances.iter().position(|i| i.name == name)
    }

    /// All instance indices of a base variable, in element order.
    pub fn family(&self, base: &str) -> Vec<usize> {
        self.instances
            .iter()
            .enumerate()
            .filter(|(_, i)| i.base == base)
            .map(|(n, _)| n)
            .collect()
    }

    /// The value a parameter instance takes at time `t`, after overlays.
    pub fn param_value(&self, instance_index: usize, t: f64) -> f64 {
        match &self.instances[instance_index].role {
            InstanceRole::Parameter {
                base_value,
                overlays,
            } => overlays.iter().fold(*base_value, |v, o| o.apply(v, t)),
            _ => panic!("instance is not a parameter"),
        }
    }

    /// Replace a stock instance's initial expression with a constant.
    /// Used by the equilibrium tooling to pin solved values.
    pub fn set_initial_value(&mut self, instance_index: usize, value: f64) {
        if let InstanceRole::Stock { initial, .. } = &mut self.instances[instance_index].role {
            *initial = LoweredExpr::Const(value);
        } else {
            panic!("instance is not a stock");
        }
    }

    /// Replace a parameter instance's base value (pre-overlay).
    pub fn set_param_value(&mut self, instance_index: usize, value: f64) {
        if let InstanceRole::Parameter { base_value, .. } =
            &mut self.instances[instance_index].role
        {
            *base_value = value;
        } else {
            panic!("instance is not a parameter");
        }
    }
}

struct Lowerer<'a> {
    defs: &'a ModelDefinition,
    /// base name -> (first instance index, dim)
    var_index: BTreeMap<&'a str, (usize, Option<usize>)>,
    table_index: BTreeMap<&'a str, usize>,
}

impl<'a> Lowerer<'a> {
    fn offset_for(
        &self,
        name: &str,
        subscript: &Option<Subscript>,
        ctx_element: Option<usize>,
        owner: &str,
    ) -> Result<usize, CompileError> {
        let &(first, dim) = self
            .var_index
            .get(name)
            .ok_or_else(|| CompileError::DimensionMismatch {
                name: owner.to_string(),
                detail: alloc::format!("unknown variable `{name}`"),
            })?;
        match (dim, subscript) {
            (None, None) => Ok(first + 1),
            (Some(d), Some(Subscript::Element(el))) => {
                let elements = &self.defs.dimensions[d].elements;
                let ei = elements.iter().position(|e| e == el).ok_or_else(|| {
                    CompileError::DimensionMismatch {
                        name: owner.to_string(),
                        detail: alloc::format!("`{el}` is not an element of `{name}`'s dimension"),
                    }
                })?;
                Ok(first + ei + 1)
            }
            (Some(_), Some(Subscript::Wildcard)) => {
                let ei = ctx_element.ok_or_else(|| CompileError::DimensionMismatch {
                    name: owner.to_string(),
                    detail: alloc::format!("`{name}[*]` used outside a subscripted context"),
                })?;
                Ok(first + ei + 1)
            }
            (None, Some(_)) => Err(CompileError::DimensionMismatch {
                name: owner.to_string(),
                detail: alloc::format!("`{name}` is scalar but was subscripted"),
            }),
            (Some(_), None) => Err(CompileError::DimensionMismatch {
                name: owner.to_string(),
                detail: alloc::format!("`{name}` is subscripted but no subscript was given"),
            }),
        }
    }

    fn lower(
        &self,
        expr: &Expr,
        ctx_element: Option<usize>,
        owner: &str,
    ) -> Result<LoweredExpr, CompileError> {
        Ok(match expr {
            Expr::Number(n) => LoweredExpr::Const(*n),
            Expr::Neg(inner) => LoweredExpr::Neg(Box::new(self.lower(inner, ctx_element, owner)?)),
            Expr::Binary { op, lhs, rhs } => LoweredExpr::Binary {
                op: *op,
                lhs: Box::new(self.lower(lhs, ctx_element, owner)?),
                rhs: Box::new(self.lower(rhs, ctx_element, owner)?),
            },
            Expr::If { cond, then, els } => LoweredExpr::If {
                cond: Box::new(self.lower(cond, ctx_element, owner)?),
                then: Box::new(self.lower(then, ctx_element, owner)?),
                els: Box::new(self.lower(els, ctx_element, owner)?),
            },
            Expr::Ref {
                name, subscript, ..
            } => {
                if name == TIME_NAME {
                    LoweredExpr::Load(TIME_OFFSET)
                } else {
                    LoweredExpr::Load(self.offset_for(name, subscript, ctx_element, owner)?)
                }
            }
            Expr::Call { name, args, .. } => {
                let mut lowered: Vec<LoweredExpr> = Vec::with_capacity(args.len());
                for a in args {
                    lowered.push(self.lower(a, ctx_element, owner)?);
                }
                match name.as_str() {
                    "safe_divide" => {
                        let fb = lowered.pop().unwrap();
                        let den = lowered.pop().unwrap();
                        let num = lowered.pop().unwrap();
                        LoweredExpr::SafeDivide(Box::new(num), Box::new(den), Box::new(fb))
                    }
                    "min" => {
                        let b = lowered.pop().unwrap();
                        let a = lowered.pop().unwrap();
                        LoweredExpr::Min(Box::new(a), Box::new(b))
                    }
                    "max" => {
                        let b = lowered.pop().unwrap();
                        let a = lowered.pop().unwrap();
                        LoweredExpr::Max(Box::new(a), Box::new(b))
                    }
                    "exp" => LoweredExpr::Exp(Box::new(lowered.pop().unwrap())),
                    lookup_name => {
                        let table = *self.table_index.get(lookup_name).ok_or_else(|| {
                            CompileError::DimensionMismatch {
                                name: owner.to_string(),
                                detail: alloc::format!("unknown function `{lookup_name}`"),
                            }
                        })?;
                        LoweredExpr::Lookup {
                            table,
                            arg: Box::new(lowered.pop().unwrap()),
                        }
                    }
                }
            }
        })
    }
}

fn collect_loads(expr: &LoweredExpr, out: &mut Vec<usize>) {
    match expr {
        LoweredExpr::Const(_) => {}
        LoweredExpr::Load(off) => out.push(*off),
        LoweredExpr::Neg(e) | LoweredExpr::Exp(e) => collect_loads(e, out),
        LoweredExpr::Binary { lhs, rhs, .. } => {
            collect_loads(lhs, out);
            collect_loads(rhs, out);
        }
        LoweredExpr::If { cond, then, els } => {
            collect_loads(cond, out);
            collect_loads(then, out);
            collect_loads(els, out);
        }
        LoweredExpr::Lookup { arg, .. } => collect_loads(arg, out),
        LoweredExpr::SafeDivide(a, b, c) => {
            collect_loads(a, out);
            collect_loads(b, out);
            collect_loads(c, out);
        }
        LoweredExpr::Min(a, b) | LoweredExpr::Max(a, b) => {
            collect_loads(a, out);
            collect_loads(b, out);
        }
    }
}

/// Depth-first topological sort with cycle extraction. `deps[i]` lists the
/// node indices node `i` depends on; only nodes present in `deps` take part.
fn topo_sort(
    nodes: &[usize],
    deps: &BTreeMap<usize, Vec<usize>>,
    names: &dyn Fn(usize) -> String,
    at_initial_time: bool,
) -> Result<Vec<usize>, CompileError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Gray,
        Black,
    }
    let mut marks: BTreeMap<usize, Mark> = nodes.iter().map(|&n| (n, Mark::White)).collect();
    let mut order = Vec::with_capacity(nodes.len());

    for &start in nodes {
        if marks[&start] != Mark::White {
            continue;
        }
        // iterative DFS: (node, next dep index)
        let mut stack: Vec<(usize, usize)> = alloc::vec![(start, 0)];
        marks.insert(start, Mark::Gray);
        while let Some(&mut (node, ref mut di)) = stack.last_mut() {
            let node_deps = &deps[&node];
            if *di < node_deps.len() {
                let dep = node_deps[*di];
                *di += 1;
                match marks.get(&dep) {
                    Some(Mark::White) => {
                        marks.insert(dep, Mark::Gray);
                        stack.push((dep, 0));
                    }
                    Some(Mark::Gray) => {
                        // found a cycle: slice the stack from the first
                        // occurrence of `dep`
                        let pos = stack.iter().position(|&(n, _)| n == dep).unwrap();
                        let mut cycle: Vec<String> =
                            stack[pos..].iter().map(|&(n, _)| names(n)).collect();
                        cycle.push(names(dep));
                        return Err(CompileError::Cycle {
                            names: cycle,
                            at_initial_time,
                        });
                    }
                    _ => {}
                }
            } else {
                marks.insert(node, Mark::Black);
                order.push(node);
                stack.pop();
            }
        }
    }
    Ok(order)
}

/// Compile a resolved model into an evaluation plan.
pub fn compile(defs: &ModelDefinition) -> Result<CompiledModel, CompileError> {
    // deterministic instance layout: variables sorted by name, elements in
    // dimension declaration order
    let mut sorted: Vec<&crate::model::VariableDef> = defs.variables.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));

    let mut instances: Vec<Instance> = Vec::new();
    let mut var_index: BTreeMap<&str, (usize, Option<usize>)> = BTreeMap::new();
    for var in &sorted {
        var_index.insert(var.name.as_str(), (instances.len(), var.dim));
        let n = defs.instance_count(var);
        for ei in 0..n {
            let (name, element) = match var.dim {
                Some(d) => (
                    alloc::format!("{}[{}]", var.name, defs.dimensions[d].elements[ei]),
                    Some(ei),
                ),
                None => (var.name.clone(), None),
            };
            instances.push(Instance {
                name,
                base: var.name.clone(),
                element,
                kind: var.kind,
                // placeholder; filled below once all offsets are known
                role: InstanceRole::Parameter {
                    base_value: 0.0,
                    overlays: Vec::new(),
                },
            });
        }
    }

    let mut table_index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut tables = Vec::new();
    let mut table_names = Vec::new();
    for l in &defs.lookups {
        table_index.insert(l.name.as_str(), tables.len());
        tables.push(l.table.clone());
        table_names.push(l.name.clone());
    }

    let lowerer = Lowerer {
        defs,
        var_index: var_index.clone(),
        table_index,
    };

    // fill roles
    for var in &sorted {
        let (first, _) = var_index[var.name.as_str()];
        let n = defs.instance_count(var);
        for ei in 0..n {
            let element = if var.dim.is_some() { Some(ei) } else { None };
            let idx = first + ei;
            let role = match &var.payload {
                VarPayload::Parameter { values } => InstanceRole::Parameter {
                    base_value: values[ei],
                    overlays: Vec::new(),
                },
                VarPayload::Equation { equation } => InstanceRole::Equation {
                    expr: lowerer.lower(equation, element, &var.name)?,
                },
                VarPayload::Stock {
                    initial,
                    inflows,
                    outflows,
                    non_negative,
                } => {
                    let flow_offsets = |names: &Vec<String>| -> Result<Vec<usize>, CompileError> {
                        names
                            .iter()
                            .map(|f| {
                                let &(ffirst, fdim) = var_index.get(f.as_str()).ok_or_else(|| {
                                    CompileError::DimensionMismatch {
                                        name: var.name.clone(),
                                        detail: alloc::format!("unknown flow `{f}`"),
                                    }
                                })?;
                                match fdim {
                                    Some(_) => {
                                        let ei = element.ok_or_else(|| {
                                            CompileError::DimensionMismatch {
                                                name: var.name.clone(),
                                                detail: alloc::format!(
                                                    "flow `{f}` is subscripted but stock is scalar"
                                                ),
                                            }
                                        })?;
                                        Ok(ffirst + ei + 1)
                                    }
                                    None => Ok(ffirst + 1),
                                }
                            })
                            .collect()
                    };
                    InstanceRole::Stock {
                        initial: lowerer.lower(initial, element, &var.name)?,
                        inflows: flow_offsets(inflows)?,
                        outflows: flow_offsets(outflows)?,
                        non_negative: *non_negative,
                    }
                }
            };
            instances[idx].role = role;
        }
    }

    let name_of = |i: usize| instances[i].name.clone();

    // runtime order: auxiliaries and flows; stocks/params/time are sources
    let eq_nodes: Vec<usize> = instances
        .iter()
        .enumerate()
        .filter(|(_, inst)| matches!(inst.kind, VarKind::Auxiliary | VarKind::Flow))
        .map(|(i, _)| i)
        .collect();
    let mut runtime_deps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in &eq_nodes {
        let mut loads = Vec::new();
        if let InstanceRole::Equation { expr } = &instances[i].role {
            collect_loads(expr, &mut loads);
        }
        let deps: Vec<usize> = loads
            .into_iter()
            .filter(|&off| off != TIME_OFFSET)
            .map(|off| off - 1)
            .filter(|&j| matches!(instances[j].kind, VarKind::Auxiliary | VarKind::Flow))
            .collect();
        runtime_deps.insert(i, deps);
    }
    let runtime_order = topo_sort(&eq_nodes, &runtime_deps, &name_of, false)?;

    // initialization order: every instance; stock initial expressions may
    // reference flows/auxiliaries evaluated at the start time
    let all_nodes: Vec<usize> = (0..instances.len()).collect();
    let mut init_deps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..instances.len() {
        let mut loads = Vec::new();
        match &instances[i].role {
            InstanceRole::Parameter { .. } => {}
            InstanceRole::Equation { expr } => collect_loads(expr, &mut loads),
            InstanceRole::Stock { initial, .. } => collect_loads(initial, &mut loads),
        }
        let deps: Vec<usize> = loads
            .into_iter()
            .filter(|&off| off != TIME_OFFSET)
            .map(|off| off - 1)
            .collect();
        init_deps.insert(i, deps);
    }
    let initial_order = topo_sort(&all_nodes, &init_deps, &name_of, true)?;

    Ok(CompiledModel {
        dimensions: defs.dimensions.clone(),
        instances,
        tables,
        table_names,
        runtime_order,
        initial_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_text;
    use crate::resolve::resolve;

    fn compile_text(text: &str) -> Result<CompiledModel, CompileError> {
        let file = parse_text("m.sdm", text).unwrap();
        let defs = resolve(&[file]).unwrap();
        compile(&defs)
    }

    #[test]
    fn single_stock_plan() {
        let m = compile_text("flow f = 3\nstock S { initial = 0 inflows = [f] }").unwrap();
        let order: Vec<&str> = m
            .runtime_order
            .iter()
            .map(|&i| m.instances[i].name.as_str())
            .collect();
        assert_eq!(order, ["f"]);
        let stocks: Vec<&str> = m
            .instances
            .iter()
            .filter(|i| i.kind == VarKind::Stock)
            .map(|i| i.name.as_str())
            .collect();
        assert_eq!(stocks, ["S"]);
    }

    #[test]
    fn cycle_error_names_members() {
        let err = compile_text("aux a = b\naux b = a").unwrap_err();
        match err {
            CompileError::Cycle {
                names,
                at_initial_time,
            } => {
                assert!(!at_initial_time);
                assert!(names.contains(&String::from("a")));
                assert!(names.contains(&String::from("b")));
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn initial_cycle_detected() {
        let err = compile_text(
            "aux a = S * 2\nstock S { initial = a inflows = [] }",
        )
        .unwrap_err();
        match err {
            CompileError::Cycle {
                at_initial_time, ..
            } => assert!(at_initial_time),
            other => panic!("expected init cycle, got {other:?}"),
        }
    }

    #[test]
    fn stock_reference_is_not_a_runtime_cycle() {
        // classic feedback through a stock is fine
        let m = compile_text(
            "flow f = S * 0.1\nstock S { initial = 1 inflows = [f] }",
        )
        .unwrap();
        assert_eq!(m.runtime_order.len(), 1);
    }

    #[test]
    fn dimension_expansion() {
        let m = compile_text(
            "dimension g { x, y }\nparam p[g] = { x: 1, y: 2 }\naux a[g] = p[*] * 10\nflow f[g] = a[*]\nstock S[g] { initial = p[*] inflows = [f] }",
        )
        .unwrap();
        assert_eq!(m.instances.len(), 8);
        assert!(m.instance_index("a[x]").is_some());
        assert!(m.instance_index("S[y]").is_some());
        // a[x] must precede f[x]
        let order: Vec<&str> = m
            .runtime_order
            .iter()
            .map(|&i| m.instances[i].name.as_str())
            .collect();
        let ax = order.iter().position(|n| *n == "a[x]").unwrap();
        let fx = order.iter().position(|n| *n == "f[x]").unwrap();
        assert!(ax < fx);
    }

    #[test]
    fn every_operand_precedes_its_user() {
        // brute-force validation of the topological order
        let m = compile_text(
            "aux c = b + 1\naux b = a * 2\naux a = 3\nflow f = c\nstock S { initial = 0 inflows = [f] }",
        )
        .unwrap();
        let mut seen: Vec<usize> = Vec::new();
        for &i in &m.runtime_order {
            if let InstanceRole::Equation { expr } = &m.instances[i].role {
                let mut loads = Vec::new();
                collect_loads(expr, &mut loads);
                for off in loads {
                    if off == TIME_OFFSET {
                        continue;
                    }
                    let j = off - 1;
                    if matches!(m.instances[j].kind, VarKind::Auxiliary | VarKind::Flow) {
                        assert!(seen.contains(&j), "{} used before defined", m.instances[j].name);
                    }
                }
            }
            seen.push(i);
        }
    }
}
