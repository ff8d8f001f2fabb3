//! Damped fixed-point search for steady-state initial stock values, plus a
//! drift check that re-simulates from a candidate state.
//!
//! The update is `S <- S + damping * tau * net_flow(S)` with `tau` fixed at
//! one year, iterating only the target stocks while frozen stocks keep
//! their configured values. For the linear draining chains this is built
//! for, the iteration contracts whenever `damping * outflow_rate < 2`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::compile::{CompiledModel, InstanceRole};
use crate::model::VarKind;
use crate::sim::{self, Engine, RunSpec, SimError};

/// Effective adjustment time of one fixed-point update, in years.
const TAU_EFF: f64 = 1.0;

/// Which stocks to solve and which to hold. Names may be instances
/// (`stock[element]`) or bases (expanding to the whole family).
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSpec {
    pub target_stocks: Vec<String>,
    pub frozen_stocks: Vec<String>,
    /// Relative net-flow tolerance (net over gross flow volume).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Damping factor in (0, 1].
    pub damping: f64,
    /// Model time at which flows are evaluated during the solve.
    pub at_time: f64,
}

impl Default for EquilibriumSpec {
    fn default() -> Self {
        EquilibriumSpec {
            target_stocks: Vec::new(),
            frozen_stocks: Vec::new(),
            tolerance: 1e-8,
            max_iterations: 10_000,
            damping: 0.5,
            at_time: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EquilibriumError {
    NoConvergence {
        best_residual: f64,
        iterations: usize,
    },
    UnknownStock(String),
    NotAStock(String),
    OverlappingSets(String),
    BadSpec(String),
    Sim(SimError),
}

impl core::fmt::Display for EquilibriumError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EquilibriumError::NoConvergence {
                best_residual,
                iterations,
            } => write!(
                f,
                "no convergence after {iterations} iterations (best residual {best_residual:e})"
            ),
            EquilibriumError::UnknownStock(n) => write!(f, "unknown stock `{n}`"),
            EquilibriumError::NotAStock(n) => write!(f, "`{n}` is not a stock"),
            EquilibriumError::OverlappingSets(n) => {
                write!(f, "`{n}` is both a target and a frozen stock")
            }
            EquilibriumError::BadSpec(msg) => write!(f, "bad equilibrium spec: {msg}"),
            EquilibriumError::Sim(e) => write!(f, "{e}"),
        }
    }
}

/// Solved state: every stock instance's value, residuals for the targets,
/// and how many iterations the solve took.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub stocks: BTreeMap<String, f64>,
    /// (stock instance name, relative net-flow residual), targets only.
    pub target_residuals: Vec<(String, f64)>,
    pub iterations: usize,
}

impl core::fmt::Display for EquilibriumSolution {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "{:<44} {:>18} {:>12}", "stock", "solved value", "residual")?;
        for (name, residual) in &self.target_residuals {
            let value = self.stocks.get(name).copied().unwrap_or(f64::NAN);
            writeln!(f, "{name:<44} {value:>18.6} {residual:>12.3e}")?;
        }
        write!(f, "converged in {} iterations", self.iterations)
    }
}

fn expand_stock_names(
    model: &CompiledModel,
    names: &[String],
) -> Result<Vec<usize>, EquilibriumError> {
    let mut out = Vec::new();
    for name in names {
        let indices: Vec<usize> = if let Some(i) = model.instance_index(name) {
            alloc::vec![i]
        } else {
            let fam = model.family(name);
            if fam.is_empty() {
                return Err(EquilibriumError::UnknownStock(name.clone()));
            }
            fam
        };
        for i in indices {
            if model.instances[i].kind != VarKind::Stock {
                return Err(EquilibriumError::NotAStock(name.clone()));
            }
            if !out.contains(&i) {
                out.push(i);
            }
        }
    }
    Ok(out)
}

/// Relative residual of a stock: |net flow| over gross flow volume.
fn relative_residual(net: f64, gross: f64) -> f64 {
    net.abs() / gross.max(1e-9)
}

/// Find stock values that zero the net flows of the target stocks while
/// frozen stocks stay at their model-defined initial values.
pub fn solve_equilibrium(
    model: &CompiledModel,
    spec: &EquilibriumSpec,
) -> Result<EquilibriumSolution, EquilibriumError> {
    if !(spec.damping > 0.0 && spec.damping <= 1.0) {
        return Err(EquilibriumError::BadSpec(
            "damping must be in (0, 1]".to_string(),
        ));
    }
    if !(spec.tolerance > 0.0) {
        return Err(EquilibriumError::BadSpec(
            "tolerance must be positive".to_string(),
        ));
    }
    let targets = expand_stock_names(model, &spec.target_stocks)?;
    let frozen = expand_stock_names(model, &spec.frozen_stocks)?;
    for &t in &targets {
        if frozen.contains(&t) {
            return Err(EquilibriumError::OverlappingSets(
                model.instances[t].name.clone(),
            ));
        }
    }

    let run_spec = RunSpec::default();
    let mut engine = Engine::new(model, &run_spec).map_err(EquilibriumError::Sim)?;
    engine.init(spec.at_time).map_err(EquilibriumError::Sim)?;

    struct Target {
        instance: usize,
        inflows: Vec<usize>,
        outflows: Vec<usize>,
        non_negative: bool,
    }
    let target_info: Vec<Target> = targets
        .iter()
        .map(|&i| match &model.instances[i].role {
            InstanceRole::Stock {
                inflows,
                outflows,
                non_negative,
                ..
            } => Target {
                instance: i,
                inflows: inflows.clone(),
                outflows: outflows.clone(),
                non_negative: *non_negative,
            },
            _ => unreachable!(),
        })
        .collect();

    let mut best_residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut residuals: Vec<f64> = alloc::vec![f64::INFINITY; targets.len()];

    while iterations < spec.max_iterations {
        iterations += 1;
        engine
            .eval_equations(spec.at_time)
            .map_err(EquilibriumError::Sim)?;

        let mut worst = 0.0f64;
        let mut nets: Vec<f64> = Vec::with_capacity(target_info.len());
        for (n, t) in target_info.iter().enumerate() {
            let net = engine.net_flow(&t.inflows, &t.outflows);
            let mut gross = 0.0;
            for &off in t.inflows.iter().chain(&t.outflows) {
                gross += engine.values[off].abs();
            }
            let rel = relative_residual(net, gross);
            residuals[n] = rel;
            worst = worst.max(rel);
            nets.push(net);
        }
        best_residual = best_residual.min(worst);
        if worst <= spec.tolerance {
            converged = true;
            break;
        }

        for (n, t) in target_info.iter().enumerate() {
            let off = model.offset(t.instance);
            let mut v = engine.values[off] + spec.damping * TAU_EFF * nets[n];
            if t.non_negative && v < 0.0 {
                v = 0.0;
            }
            engine.values[off] = v;
        }
    }

    if !converged {
        return Err(EquilibriumError::NoConvergence {
            best_residual,
            iterations,
        });
    }

    let mut stocks = BTreeMap::new();
    for &i in &sim::stock_indices(model) {
        stocks.insert(
            model.instances[i].name.clone(),
            engine.values[model.offset(i)],
        );
    }
    let target_residuals = target_info
        .iter()
        .zip(&residuals)
        .map(|(t, &r)| (model.instances[t.instance].name.clone(), r))
        .collect();

    Ok(EquilibriumSolution {
        stocks,
        target_residuals,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftRow {
    pub stock: String,
    pub initial: f64,
    pub max_abs_drift: f64,
    /// Drift relative to the initial magnitude (floor 1e-9).
    pub max_rel_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<DriftRow>,
    pub tolerance: f64,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.max_rel_drift < self.tolerance)
    }

    /// Stocks whose drift exceeds the tolerance.
    pub fn failures(&self) -> Vec<&DriftRow> {
        self.rows
            .iter()
            .filter(|r| r.max_rel_drift >= self.tolerance)
            .collect()
    }
}

impl core::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(
            f,
            "{:<44} {:>16} {:>14} {:>8}",
            "stock", "initial", "rel drift", "ok"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<44} {:>16.6} {:>14.3e} {:>8}",
                r.stock,
                r.initial,
                r.max_rel_drift,
                if r.max_rel_drift < self.tolerance {
                    "yes"
                } else {
                    "NO"
                }
            )?;
        }
        Ok(())
    }
}

/// Simulate `horizon` years from the given initial stock values (no
/// overlays) and report the worst relative drift of every target and
/// frozen stock.
pub fn verify_equilibrium(
    model: &CompiledModel,
    spec: &EquilibriumSpec,
    initials: &BTreeMap<String, f64>,
    horizon: f64,
    tolerance: f64,
) -> Result<VerifyReport, EquilibriumError> {
    let mut pinned = model.clone();
    for (name, value) in initials {
        let i = pinned
            .instance_index(name)
            .ok_or_else(|| EquilibriumError::UnknownStock(name.clone()))?;
        if pinned.instances[i].kind != VarKind::Stock {
            return Err(EquilibriumError::NotAStock(name.clone()));
        }
        pinned.set_initial_value(i, *value);
    }

    let run_spec = RunSpec {
        start: spec.at_time,
        stop: spec.at_time + horizon,
        ..RunSpec::default()
    };
    let run = sim::simulate(&pinned, &run_spec).map_err(EquilibriumError::Sim)?;

    let watched = expand_stock_names(model, &spec.target_stocks)?
        .into_iter()
        .chain(expand_stock_names(model, &spec.frozen_stocks)?)
        .collect::<Vec<_>>();

    let mut rows = Vec::new();
    for i in watched {
        let name = &model.instances[i].name;
        let series = run.series_by_name(name).expect("stock series");
        let s0 = series[0];
        let max_abs = series
            .iter()
            .map(|&v| (v - s0).abs())
            .fold(0.0f64, f64::max);
        rows.push(DriftRow {
            stock: name.clone(),
            initial: s0,
            max_abs_drift: max_abs,
            max_rel_drift: max_abs / s0.abs().max(1e-9),
        });
    }
    Ok(VerifyReport { rows, tolerance })
}
