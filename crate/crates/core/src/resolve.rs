//! Semantic resolution: turns parsed source files into a validated
//! [`ModelDefinition`].
//!
//! Checks performed here:
//! - one definition per name, across all files of a model
//! - every reference resolves; subscript usage matches the target's
//!   dimension (`[*]` only where the context shares the dimension)
//! - stock inflow/outflow lists name flow-kind variables
//! - lookup tables are well formed; calls hit lookups or builtins with the
//!   right arity
//! - scenario overlays target parameters

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{self, Decl, Expr, ParamValue, Pos, SourceFile, Subscript};
use crate::diag::Diagnostic;
use crate::lookup::{LookupError, LookupTable};
use crate::model::{
    Dimension, LookupDef, ModelDefinition, VarKind, VarPayload, VariableDef,
};
use crate::scenario::{Overlay, OverlayShape, Scenario};

/// Name of the built-in simulation clock, usable in any equation.
pub const TIME_NAME: &str = "time";

pub(crate) const BUILTINS: &[(&str, usize)] = &[
    ("safe_divide", 3),
    ("min", 2),
    ("max", 2),
    ("exp", 1),
];

struct Resolver<'a> {
    files: &'a [SourceFile],
    diags: Vec<Diagnostic>,
    /// name -> (file index, decl index)
    by_name: BTreeMap<&'a str, (usize, usize)>,
    dims: Vec<Dimension>,
    dim_index: BTreeMap<&'a str, usize>,
}

impl<'a> Resolver<'a> {
    fn error(&mut self, file: &str, pos: Pos, message: String) {
        self.diags
            .push(Diagnostic::error(file, pos.line, pos.column, message));
    }

    fn decl_of(&self, name: &str) -> Option<&'a Decl> {
        let (fi, di) = *self.by_name.get(name)?;
        Some(&self.files[fi].decls[di])
    }

    fn kind_of(&self, name: &str) -> Option<VarKind> {
        match self.decl_of(name)? {
            Decl::Param(_) => Some(VarKind::Parameter),
            Decl::Var(v) => Some(match v.kind {
                ast::VarKind::Auxiliary => VarKind::Auxiliary,
                ast::VarKind::Flow => VarKind::Flow,
            }),
            Decl::Stock(_) => Some(VarKind::Stock),
            _ => None,
        }
    }

    /// Dimension index a variable declaration carries, if any.
    fn dim_of(&self, name: &str) -> Option<usize> {
        let dims = match self.decl_of(name)? {
            Decl::Param(p) => &p.dims,
            Decl::Var(v) => &v.dims,
            Decl::Stock(s) => &s.dims,
            _ => return None,
        };
        dims.first().and_then(|d| self.dim_index.get(d.as_str())).copied()
    }

    /// Validate a declared dimension list; returns the dimension index.
    fn check_dims(&mut self, file: &str, pos: Pos, dims: &[String]) -> Option<usize> {
        if dims.len() > 1 {
            self.error(
                file,
                pos,
                "at most one dimension per variable is supported".into(),
            );
            return None;
        }
        let name = dims.first()?;
        match self.dim_index.get(name.as_str()) {
            Some(&i) => Some(i),
            None => {
                self.error(file, pos, alloc::format!("undefined dimension `{name}`"));
                None
            }
        }
    }

    /// Walk an expression, checking references against the declaration
    /// context (`ctx_dim` is the dimension of the enclosing variable).
    fn check_expr(&mut self, file: &str, owner: &str, ctx_dim: Option<usize>, expr: &Expr) {
        match expr {
            Expr::Number(_) => {}
            Expr::Neg(inner) => self.check_expr(file, owner, ctx_dim, inner),
            Expr::Binary { lhs, rhs, .. } => {
                self.check_expr(file, owner, ctx_dim, lhs);
                self.check_expr(file, owner, ctx_dim, rhs);
            }
            Expr::If { cond, then, els } => {
                self.check_expr(file, owner, ctx_dim, cond);
                self.check_expr(file, owner, ctx_dim, then);
                self.check_expr(file, owner, ctx_dim, els);
            }
            Expr::Call { name, args, pos } => {
                if let Some(&(_, arity)) = BUILTINS.iter().find(|(b, _)| b == name) {
                    if args.len() != arity {
                        self.error(
                            file,
                            *pos,
                            alloc::format!(
                                "`{name}` takes {arity} argument(s), found {}",
                                args.len()
                            ),
                        );
                    }
                } else {
                    match self.decl_of(name) {
                        Some(Decl::Lookup(_)) => {
                            if args.len() != 1 {
                                self.error(
                                    file,
                                    *pos,
                                    alloc::format!(
                                        "lookup `{name}` takes 1 argument, found {}",
                                        args.len()
                                    ),
                                );
                            }
                        }
                        Some(_) => {
                            self.error(
                                file,
                                *pos,
                                alloc::format!("kind mismatch: `{name}` is not a lookup or builtin function"),
                            );
                        }
                        None => {
                            self.error(
                                file,
                                *pos,
                                alloc::format!("undefined reference `{name}`"),
                            );
                        }
                    }
                }
                for a in args {
                    self.check_expr(file, owner, ctx_dim, a);
                }
            }
            Expr::Ref {
                name,
                subscript,
                pos,
            } => {
                if name == TIME_NAME {
                    if subscript.is_some() {
                        self.error(file, *pos, "`time` takes no subscript".into());
                    }
                    return;
                }
                let Some(decl) = self.decl_of(name) else {
                    self.error(file, *pos, alloc::format!("undefined reference `{name}`"));
                    return;
                };
                if matches!(decl, Decl::Lookup(_)) {
                    self.error(
                        file,
                        *pos,
                        alloc::format!("lookup `{name}` must be called with an argument"),
                    );
                    return;
                }
                if matches!(decl, Decl::Dimension(_) | Decl::Scenario(_)) {
                    self.error(
                        file,
                        *pos,
                        alloc::format!("kind mismatch: `{name}` is not a variable"),
                    );
                    return;
                }
                let target_dim = self.dim_of(name);
                match (target_dim, subscript) {
                    (None, None) => {}
                    (None, Some(_)) => {
                        self.error(
                            file,
                            *pos,
                            alloc::format!("dimension mismatch: `{name}` is scalar and takes no subscript"),
                        );
                    }
                    (Some(_), None) => {
                        self.error(
                            file,
                            *pos,
                            alloc::format!(
                                "dimension mismatch: `{name}` is subscripted; write `{name}[element]` or `{name}[*]`"
                            ),
                        );
                    }
                    (Some(d), Some(Subscript::Wildcard)) => {
                        if ctx_dim != Some(d) {
                            self.error(
                                file,
                                *pos,
                                alloc::format!(
                                    "dimension mismatch: `{name}[*]` requires `{owner}` to share dimension `{}`",
                                    self.dims[d].name
                                ),
                            );
                        }
                    }
                    (Some(d), Some(Subscript::Element(el))) => {
                        if !self.dims[d].elements.iter().any(|e| e == el) {
                            self.error(
                                file,
                                *pos,
                                alloc::format!(
                                    "dimension mismatch: `{el}` is not an element of dimension `{}`",
                                    self.dims[d].name
                                ),
                            );
                        }
                    }
                }
            }
        }
    }
}

pub fn resolve(files: &[SourceFile]) -> Result<ModelDefinition, Vec<Diagnostic>> {
    let mut r = Resolver {
        files,
        diags: Vec::new(),
        by_name: BTreeMap::new(),
        dims: Vec::new(),
        dim_index: BTreeMap::new(),
    };

    // pass 1: collect names (scenarios live in their own namespace)
    let mut scenario_names: BTreeMap<&str, Pos> = BTreeMap::new();
    for (fi, file) in files.iter().enumerate() {
        for (di, decl) in file.decls.iter().enumerate() {
            if let Decl::Scenario(s) = decl {
                if let Some(_prev) = scenario_names.get(s.name.as_str()) {
                    r.error(
                        &file.name,
                        s.pos,
                        alloc::format!("duplicate scenario `{}`", s.name),
                    );
                } else {
                    scenario_names.insert(&s.name, s.pos);
                }
                continue;
            }
            let name = decl.name();
            if name == TIME_NAME || BUILTINS.iter().any(|(b, _)| *b == name) {
                r.error(
                    &file.name,
                    decl.pos(),
                    alloc::format!("`{name}` is a reserved name"),
                );
                continue;
            }
            if r.by_name.contains_key(name) {
                r.error(
                    &file.name,
                    decl.pos(),
                    alloc::format!("duplicate definition of `{name}`"),
                );
            } else {
                r.by_name.insert(name, (fi, di));
            }
        }
    }

    // pass 2: dimensions
    for file in files {
        for decl in &file.decls {
            if let Decl::Dimension(d) = decl {
                if r.by_name.get(d.name.as_str())
                    != Some(&(
                        files.iter().position(|f| core::ptr::eq(f, file)).unwrap(),
                        file.decls.iter().position(|x| core::ptr::eq(x, decl)).unwrap(),
                    ))
                {
                    // duplicate already reported
                }
                if d.elements.is_empty() {
                    r.error(&file.name, d.pos, "dimension has no elements".into());
                    continue;
                }
                let mut seen: Vec<&str> = Vec::new();
                let mut ok = true;
                for el in &d.elements {
                    if seen.contains(&el.as_str()) {
                        r.error(
                            &file.name,
                            d.pos,
                            alloc::format!("duplicate element `{el}` in dimension `{}`", d.name),
                        );
                        ok = false;
                    }
                    seen.push(el);
                }
                if ok && !r.dim_index.contains_key(d.name.as_str()) {
                    r.dim_index.insert(&d.name, r.dims.len());
                    r.dims.push(Dimension {
                        name: d.name.clone(),
                        elements: d.elements.clone(),
                    });
                }
            }
        }
    }

    // pass 3: declarations
    let mut variables: Vec<VariableDef> = Vec::new();
    let mut lookups: Vec<LookupDef> = Vec::new();
    for file in files {
        for decl in &file.decls {
            match decl {
                Decl::Dimension(_) | Decl::Scenario(_) => {}
                Decl::Lookup(l) => match LookupTable::new(l.points.clone()) {
                    Ok(table) => lookups.push(LookupDef {
                        name: l.name.clone(),
                        table,
                    }),
                    Err(LookupError::TooFewPoints) => {
                        r.error(
                            &file.name,
                            l.pos,
                            alloc::format!("lookup `{}` needs at least 2 points", l.name),
                        );
                    }
                    Err(LookupError::NonIncreasingX { index }) => {
                        r.error(
                            &file.name,
                            l.pos,
                            alloc::format!(
                                "lookup `{}` x values must be strictly increasing (point {})",
                                l.name,
                                index + 1
                            ),
                        );
                    }
                },
                Decl::Param(p) => {
                    let dim = r.check_dims(&file.name, p.pos, &p.dims);
                    let n = dim.map(|d| r.dims[d].elements.len()).unwrap_or(1);
                    let values = match &p.value {
                        ParamValue::Scalar(v) => alloc::vec![*v; n],
                        ParamValue::PerElement(entries) => {
                            let Some(d) = dim else {
                                r.error(
                                    &file.name,
                                    p.pos,
                                    alloc::format!(
                                        "parameter `{}` has per-element values but no dimension",
                                        p.name
                                    ),
                                );
                                continue;
                            };
                            let elements = r.dims[d].elements.clone();
                            let mut values = alloc::vec![f64::NAN; elements.len()];
                            let mut bad = false;
                            for (el, v, epos) in entries {
                                match elements.iter().position(|e| e == el) {
                                    Some(i) => {
                                        if !values[i].is_nan() {
                                            r.error(
                                                &file.name,
                                                *epos,
                                                alloc::format!("duplicate value for element `{el}`"),
                                            );
                                            bad = true;
                                        }
                                        values[i] = *v;
                                    }
                                    None => {
                                        r.error(
                                            &file.name,
                                            *epos,
                                            alloc::format!(
                                                "dimension mismatch: `{el}` is not an element of dimension `{}`",
                                                r.dims[d].name
                                            ),
                                        );
                                        bad = true;
                                    }
                                }
                            }
                            for (i, v) in values.iter().enumerate() {
                                if v.is_nan() {
                                    r.error(
                                        &file.name,
                                        p.pos,
                                        alloc::format!(
                                            "parameter `{}` is missing a value for element `{}`",
                                            p.name,
                                            elements[i]
                                        ),
                                    );
                                    bad = true;
                                }
                            }
                            if bad {
                                continue;
                            }
                            values
                        }
                    };
                    variables.push(VariableDef {
                        name: p.name.clone(),
                        kind: VarKind::Parameter,
                        dim,
                        units: p.units.clone(),
                        payload: VarPayload::Parameter { values },
                    });
                }
                Decl::Var(v) => {
                    let dim = r.check_dims(&file.name, v.pos, &v.dims);
                    r.check_expr(&file.name, &v.name, dim, &v.equation);
                    variables.push(VariableDef {
                        name: v.name.clone(),
                        kind: match v.kind {
                            ast::VarKind::Auxiliary => VarKind::Auxiliary,
                            ast::VarKind::Flow => VarKind::Flow,
                        },
                        dim,
                        units: v.units.clone(),
                        payload: VarPayload::Equation {
                            equation: v.equation.clone(),
                        },
                    });
                }
                Decl::Stock(s) => {
                    let dim = r.check_dims(&file.name, s.pos, &s.dims);
                    r.check_expr(&file.name, &s.name, dim, &s.initial);
                    for (flow, fpos) in s.inflows.iter().chain(&s.outflows) {
                        match r.kind_of(flow) {
                            Some(VarKind::Flow) => {
                                // a stock's flows must share its dimension or be scalar
                                let fdim = r.dim_of(flow);
                                if fdim.is_some() && fdim != dim {
                                    r.error(
                                        &file.name,
                                        *fpos,
                                        alloc::format!(
                                            "dimension mismatch: flow `{flow}` does not share the dimension of stock `{}`",
                                            s.name
                                        ),
                                    );
                                }
                            }
                            Some(k) => {
                                r.error(
                                    &file.name,
                                    *fpos,
                                    alloc::format!(
                                        "kind mismatch: `{flow}` is a {} but stock `{}` lists it as a flow",
                                        k.as_str(),
                                        s.name
                                    ),
                                );
                            }
                            None => {
                                r.error(
                                    &file.name,
                                    *fpos,
                                    alloc::format!("undefined reference `{flow}`"),
                                );
                            }
                        }
                    }
                    variables.push(VariableDef {
                        name: s.name.clone(),
                        kind: VarKind::Stock,
                        dim,
                        units: s.units.clone(),
                        payload: VarPayload::Stock {
                            initial: s.initial.clone(),
                            inflows: s.inflows.iter().map(|(n, _)| n.clone()).collect(),
                            outflows: s.outflows.iter().map(|(n, _)| n.clone()).collect(),
                            non_negative: s.non_negative,
                        },
                    });
                }
            }
        }
    }

    // pass 4: scenarios
    let mut scenarios: Vec<Scenario> = Vec::new();
    for file in files {
        for decl in &file.decls {
            let Decl::Scenario(s) = decl else { continue };
            let mut overlays = Vec::new();
            for o in &s.overlays {
                match r.kind_of(&o.target) {
                    Some(VarKind::Parameter) => {}
                    Some(k) => {
                        r.error(
                            &file.name,
                            o.pos,
                            alloc::format!(
                                "kind mismatch: overlay target `{}` is a {}, not a parameter",
                                o.target,
                                k.as_str()
                            ),
                        );
                        continue;
                    }
                    None => {
                        r.error(
                            &file.name,
                            o.pos,
                            alloc::format!("undefined reference `{}`", o.target),
                        );
                        continue;
                    }
                }
                if let Some(el) = &o.element {
                    match r.dim_of(&o.target) {
                        Some(d) => {
                            if !r.dims[d].elements.iter().any(|e| e == el) {
                                r.error(
                                    &file.name,
                                    o.pos,
                                    alloc::format!(
                                        "dimension mismatch: `{el}` is not an element of dimension `{}`",
                                        r.dims[d].name
                                    ),
                                );
                                continue;
                            }
                        }
                        None => {
                            r.error(
                                &file.name,
                                o.pos,
                                alloc::format!(
                                    "dimension mismatch: `{}` is scalar and takes no subscript",
                                    o.target
                                ),
                            );
                            continue;
                        }
                    }
                }
                overlays.push(Overlay {
                    target: o.target.clone(),
                    element: o.element.clone(),
                    shape: match o.shape {
                        ast::OverlayShapeDecl::Step { t0, value } => OverlayShape::Step { t0, value },
                        ast::OverlayShapeDecl::AddStep { t0, delta } => {
                            OverlayShape::AddStep { t0, delta }
                        }
                        ast::OverlayShapeDecl::ScaleStep { t0, factor } => {
                            OverlayShape::ScaleStep { t0, factor }
                        }
                        ast::OverlayShapeDecl::Pulse { t0, width, height } => {
                            OverlayShape::Pulse { t0, width, height }
                        }
                        ast::OverlayShapeDecl::Ramp { t0, t1, slope } => {
                            OverlayShape::Ramp { t0, t1, slope }
                        }
                        ast::OverlayShapeDecl::Switch { value } => OverlayShape::Switch { value },
                    },
                });
            }
            scenarios.push(Scenario {
                name: s.name.clone(),
                overlays,
            });
        }
    }

    if r.diags.is_empty() {
        Ok(ModelDefinition {
            dimensions: r.dims,
            variables,
            lookups,
            scenarios,
        })
    } else {
        Err(r.diags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_text;

    fn resolve_text(text: &str) -> Result<ModelDefinition, Vec<Diagnostic>> {
        let file = parse_text("m.sdm", text).unwrap();
        resolve(&[file])
    }

    #[test]
    fn undefined_reference_reported_with_position() {
        let errs = resolve_text("flow f = q * 2").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("undefined reference `q`"));
        assert_eq!((errs[0].line, errs[0].column), (1, 10));
    }

    #[test]
    fn aux_as_inflow_is_kind_mismatch() {
        let errs =
            resolve_text("aux a = 1\nstock S { initial = 0 inflows = [a] }").unwrap_err();
        assert!(errs[0].message.contains("kind mismatch"));
    }

    #[test]
    fn subscript_checks() {
        let ok = resolve_text(
            "dimension g { x, y }\nparam p[g] = { x: 1, y: 2 }\naux a[g] = p[*] + p[x]",
        );
        assert!(ok.is_ok());

        let errs = resolve_text("dimension g { x, y }\nparam p[g] = 1\naux a = p[*]").unwrap_err();
        assert!(errs[0].message.contains("dimension mismatch"));

        let errs = resolve_text("param p = 1\naux a = p[x]").unwrap_err();
        assert!(errs[0].message.contains("scalar"));

        let errs = resolve_text("dimension g { x, y }\nparam p[g] = 1\naux a = p").unwrap_err();
        assert!(errs[0].message.contains("subscripted"));
    }

    #[test]
    fn duplicate_definitions() {
        let errs = resolve_text("aux a = 1\nparam a = 2").unwrap_err();
        assert!(errs[0].message.contains("duplicate definition"));
    }

    #[test]
    fn per_element_param_must_cover_all_elements() {
        let errs =
            resolve_text("dimension g { x, y }\nparam p[g] = { x: 1 }").unwrap_err();
        assert!(errs[0].message.contains("missing a value for element `y`"));
    }

    #[test]
    fn overlay_must_target_parameter() {
        let errs = resolve_text(
            "aux a = 1\nscenario s { step a at 5 to 2 }",
        )
        .unwrap_err();
        assert!(errs[0].message.contains("not a parameter"));
    }

    #[test]
    fn lookup_arity_and_value_position() {
        let errs = resolve_text("lookup f = [(0,0),(1,1)]\naux a = f(1, 2)").unwrap_err();
        assert!(errs[0].message.contains("takes 1 argument"));
        let errs = resolve_text("lookup f = [(0,0),(1,1)]\naux a = f + 1").unwrap_err();
        assert!(errs[0].message.contains("must be called"));
    }

    #[test]
    fn reserved_names_rejected() {
        let errs = resolve_text("param time = 1").unwrap_err();
        assert!(errs[0].message.contains("reserved"));
    }

    #[test]
    fn subscripted_aux_resolves_per_element() {
        let m = resolve_text(
            "dimension g { x, y }\nparam p[g] = { x: 1, y: 2 }\naux a[g] = p[*] * 2",
        )
        .unwrap();
        let a = m.variable("a").unwrap();
        assert_eq!(m.instance_count(a), 2);
    }
}
