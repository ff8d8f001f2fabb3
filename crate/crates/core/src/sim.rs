//! Fixed-step continuous simulation of a compiled model.
//!
//! Each step evaluates parameters (with any timed overlays), then
//! auxiliaries and flows in dependency order, then advances stocks with the
//! chosen integration method. Stocks declared `nonneg` are floored at zero
//! and the clipped amount is recorded so the discrete conservation identity
//! stays checkable.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::compile::{CompiledModel, InstanceRole, TIME_OFFSET};
use crate::expr::eval;
use crate::model::VarKind;

pub use crate::expr::safe_divide;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Euler,
    Rk4,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "euler" => Some(Method::Euler),
            "rk4" => Some(Method::Rk4),
            _ => None,
        }
    }
}

/// How to run one simulation. Times are in years.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub start: f64,
    pub stop: f64,
    pub dt: f64,
    pub method: Method,
    pub save_interval: f64,
    /// Parameter overrides by name (`p`) or instance (`p[element]`),
    /// replacing the base value before overlays apply.
    pub overrides: BTreeMap<String, f64>,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            start: 0.0,
            stop: 20.0,
            dt: 0.0625,
            method: Method::Euler,
            save_interval: 0.25,
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    InvalidSpec(String),
    /// An evaluated variable became NaN or infinite.
    NonFinite { variable: String, time: f64 },
    UnknownOverride(String),
    KindMismatch(String),
    MissingStock(String),
}

impl core::fmt::Display for SimError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SimError::InvalidSpec(msg) => write!(f, "invalid run spec: {msg}"),
            SimError::NonFinite { variable, time } => {
                write!(f, "`{variable}` is not finite at t = {time}")
            }
            SimError::UnknownOverride(name) => write!(f, "unknown override target `{name}`"),
            SimError::KindMismatch(name) => {
                write!(f, "override target `{name}` is not a parameter")
            }
            SimError::MissingStock(name) => write!(f, "state is missing stock `{name}`"),
        }
    }
}

impl RunSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0) {
            return Err(SimError::InvalidSpec("dt must be positive".to_string()));
        }
        if !(self.stop > self.start) {
            return Err(SimError::InvalidSpec(
                "stop time must be after start time".to_string(),
            ));
        }
        let ratio = self.save_interval / self.dt;
        if ratio < 1.0 - 1e-9 || (ratio - libm::round(ratio)).abs() > 1e-9 {
            return Err(SimError::InvalidSpec(alloc::format!(
                "save interval {} is not an integer multiple of dt {}",
                self.save_interval,
                self.dt
            )));
        }
        Ok(())
    }

    fn n_steps(&self) -> usize {
        libm::round((self.stop - self.start) / self.dt) as usize
    }

    fn save_every(&self) -> usize {
        libm::round(self.save_interval / self.dt) as usize
    }
}

/// Per-stock record of what the integrator actually added: the discrete
/// time-integral of net flow and the total floored away by `nonneg`, both
/// sampled on the save grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StockAccounting {
    pub instance: usize,
    pub cumulative_net: Vec<f64>,
    pub cumulative_clip: Vec<f64>,
}

/// Saved trajectories of every variable instance for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scenario: String,
    pub spec: RunSpec,
    pub times: Vec<f64>,
    /// Instance display names, aligned with `series`.
    pub names: Vec<String>,
    pub kinds: Vec<VarKind>,
    /// `series[i][k]` is instance `i` at `times[k]`.
    pub series: Vec<Vec<f64>>,
    pub stock_accounting: Vec<StockAccounting>,
}

impl RunResult {
    pub fn series_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn series_by_name(&self, name: &str) -> Option<&[f64]> {
        Some(self.series[self.series_index(name)?].as_slice())
    }

    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&x| (x - t).abs() < 1e-9)
    }

    /// Value of an instance at a saved time point.
    pub fn value_at(&self, name: &str, t: f64) -> Option<f64> {
        let s = self.series_by_name(name)?;
        Some(s[self.time_index(t)?])
    }
}

/// Mutable working state for one run.
pub(crate) struct Engine<'m> {
    pub(crate) model: &'m CompiledModel,
    /// (instance index, effective base value), overrides applied.
    params: Vec<(usize, f64)>,
    pub(crate) values: Vec<f64>,
}

impl<'m> Engine<'m> {
    pub(crate) fn new(model: &'m CompiledModel, spec: &RunSpec) -> Result<Self, SimError> {
        let mut params: Vec<(usize, f64)> = Vec::new();
        for (i, inst) in model.instances.iter().enumerate() {
            if let InstanceRole::Parameter { base_value, .. } = &inst.role {
                params.push((i, *base_value));
            }
        }
        for (name, value) in &spec.overrides {
            let targets: Vec<usize> = if let Some(i) = model.instance_index(name) {
                alloc::vec![i]
            } else {
                let fam = model.family(name);
                if fam.is_empty() {
                    return Err(SimError::UnknownOverride(name.clone()));
                }
                fam
            };
            for t in targets {
                if !matches!(model.instances[t].kind, VarKind::Parameter) {
                    return Err(SimError::KindMismatch(name.clone()));
                }
                let slot = params.iter_mut().find(|(i, _)| *i == t).unwrap();
                slot.1 = *value;
            }
        }
        Ok(Engine {
            model,
            params,
            values: alloc::vec![0.0; model.n_slots()],
        })
    }

    pub(crate) fn write_params(&mut self, t: f64) {
        for &(i, base) in &self.params {
            let v = match &self.model.instances[i].role {
                InstanceRole::Parameter { overlays, .. } => {
                    overlays.iter().fold(base, |v, o| o.apply(v, t))
                }
                _ => unreachable!(),
            };
            self.values[self.model.offset(i)] = v;
        }
    }

    /// Evaluate auxiliaries and flows in dependency order.
    pub(crate) fn eval_equations(&mut self, t: f64) -> Result<(), SimError> {
        for &i in &self.model.runtime_order {
            if let InstanceRole::Equation { expr } = &self.model.instances[i].role {
                let v = eval(expr, &self.values, &self.model.tables);
                if !v.is_finite() {
                    return Err(SimError::NonFinite {
                        variable: self.model.instances[i].name.clone(),
                        time: t,
                    });
                }
                self.values[self.model.offset(i)] = v;
            }
        }
        Ok(())
    }

    /// Evaluate the full initialization order at the start time.
    pub(crate) fn init(&mut self, t0: f64) -> Result<(), SimError> {
        self.values[TIME_OFFSET] = t0;
        self.write_params(t0);
        for &i in &self.model.initial_order {
            let off = self.model.offset(i);
            match &self.model.instances[i].role {
                InstanceRole::Parameter { .. } => {} // already written
                InstanceRole::Equation { expr } | InstanceRole::Stock { initial: expr, .. } => {
                    let v = eval(expr, &self.values, &self.model.tables);
                    if !v.is_finite() {
                        return Err(SimError::NonFinite {
                            variable: self.model.instances[i].name.clone(),
                            time: t0,
                        });
                    }
                    self.values[off] = v;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn net_flow(&self, inflows: &[usize], outflows: &[usize]) -> f64 {
        let mut net = 0.0;
        for &off in inflows {
            net += self.values[off];
        }
        for &off in outflows {
            net -= self.values[off];
        }
        net
    }

    /// Net flow of every stock given current flow values, in stock order.
    fn stock_derivatives(&self, stocks: &[usize]) -> Vec<f64> {
        stocks
            .iter()
            .map(|&i| match &self.model.instances[i].role {
                InstanceRole::Stock {
                    inflows, outflows, ..
                } => self.net_flow(inflows, outflows),
                _ => unreachable!(),
            })
            .collect()
    }

    /// Advance stocks from `t` to `t + dt`. Returns `(applied, clipped)`
    /// per stock: the discrete net-flow integral and the amount floored.
    /// Leaves the slab holding the new stock values with parameters and
    /// equations re-evaluated at `t + dt`.
    fn step(
        &mut self,
        stocks: &[usize],
        t: f64,
        dt: f64,
        method: Method,
    ) -> Result<(Vec<f64>, Vec<f64>), SimError> {
        let s0: Vec<f64> = stocks
            .iter()
            .map(|&i| self.values[self.model.offset(i)])
            .collect();

        let increments: Vec<f64> = match method {
            Method::Euler => {
                let k1 = self.stock_derivatives(stocks);
                k1.iter().map(|d| d * dt).collect()
            }
            Method::Rk4 => {
                let k1 = self.stock_derivatives(stocks);

                let mut stage = |s: &Vec<f64>, ts: f64| -> Result<Vec<f64>, SimError> {
                    for (n, &i) in stocks.iter().enumerate() {
                        self.values[self.model.offset(i)] = s[n];
                    }
                    self.values[TIME_OFFSET] = ts;
                    self.write_params(ts);
                    self.eval_equations(ts)?;
                    Ok(self.stock_derivatives(stocks))
                };

                let s2: Vec<f64> = s0
                    .iter()
                    .zip(&k1)
                    .map(|(s, k)| s + 0.5 * dt * k)
                    .collect();
                let k2 = stage(&s2, t + 0.5 * dt)?;
                let s3: Vec<f64> = s0
                    .iter()
                    .zip(&k2)
                    .map(|(s, k)| s + 0.5 * dt * k)
                    .collect();
                let k3 = stage(&s3, t + 0.5 * dt)?;
                let s4: Vec<f64> = s0.iter().zip(&k3).map(|(s, k)| s + dt * k).collect();
                let k4 = stage(&s4, t + dt)?;

                (0..stocks.len())
                    .map(|n| dt * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]) / 6.0)
                    .collect()
            }
        };

        let mut clipped = alloc::vec![0.0; stocks.len()];
        for (n, &i) in stocks.iter().enumerate() {
            let non_negative = match &self.model.instances[i].role {
                InstanceRole::Stock { non_negative, .. } => *non_negative,
                _ => unreachable!(),
            };
            let mut v = s0[n] + increments[n];
            if non_negative && v < 0.0 {
                clipped[n] = -v;
                v = 0.0;
            }
            self.values[self.model.offset(i)] = v;
        }

        let t_next = t + dt;
        self.values[TIME_OFFSET] = t_next;
        self.write_params(t_next);
        self.eval_equations(t_next)?;

        Ok((increments, clipped))
    }
}

pub(crate) fn stock_indices(model: &CompiledModel) -> Vec<usize> {
    model
        .instances
        .iter()
        .enumerate()
        .filter(|(_, inst)| inst.kind == VarKind::Stock)
        .map(|(i, _)| i)
        .collect()
}

/// Advance a stock-value state by one step. The state map must contain a
/// value for every stock instance; returns the new state plus the amount
/// clipped per stock by non-negativity floors.
pub fn integrate_step(
    model: &CompiledModel,
    state: &BTreeMap<String, f64>,
    t: f64,
    dt: f64,
    method: Method,
) -> Result<(BTreeMap<String, f64>, BTreeMap<String, f64>), SimError> {
    let spec = RunSpec::default();
    let mut engine = Engine::new(model, &spec)?;
    let stocks = stock_indices(model);

    engine.values[TIME_OFFSET] = t;
    engine.write_params(t);
    for &i in &stocks {
        let name = &model.instances[i].name;
        let v = state
            .get(name)
            .copied()
            .ok_or_else(|| SimError::MissingStock(name.clone()))?;
        engine.values[model.offset(i)] = v;
    }
    engine.eval_equations(t)?;
    let (_, clipped) = engine.step(&stocks, t, dt, method)?;

    let mut out = BTreeMap::new();
    let mut clips = BTreeMap::new();
    for (n, &i) in stocks.iter().enumerate() {
        let name = model.instances[i].name.clone();
        out.insert(name.clone(), engine.values[model.offset(i)]);
        clips.insert(name, clipped[n]);
    }
    Ok((out, clips))
}

/// Run a compiled model over the spec's horizon, saving every variable at
/// the save interval. Deterministic: identical inputs produce identical
/// results.
pub fn simulate(model: &CompiledModel, spec: &RunSpec) -> Result<RunResult, SimError> {
    simulate_named(model, spec, "baseline")
}

/// [`simulate`] with an explicit scenario name recorded in the result.
pub fn simulate_named(
    model: &CompiledModel,
    spec: &RunSpec,
    scenario: &str,
) -> Result<RunResult, SimError> {
    spec.validate()?;
    let mut engine = Engine::new(model, spec)?;
    let stocks = stock_indices(model);

    let n_steps = spec.n_steps();
    let save_every = spec.save_every();
    let n_saves = n_steps / save_every + 1;

    let mut times = Vec::with_capacity(n_saves);
    let mut series: Vec<Vec<f64>> =
        alloc::vec![Vec::with_capacity(n_saves); model.instances.len()];
    let mut accounting: Vec<StockAccounting> = stocks
        .iter()
        .map(|&i| StockAccounting {
            instance: i,
            cumulative_net: Vec::with_capacity(n_saves),
            cumulative_clip: Vec::with_capacity(n_saves),
        })
        .collect();
    let mut cum_net = alloc::vec![0.0; stocks.len()];
    let mut cum_clip = alloc::vec![0.0; stocks.len()];

    engine.init(spec.start)?;

    let save = |engine: &Engine,
                    t: f64,
                    cum_net: &[f64],
                    cum_clip: &[f64],
                    times: &mut Vec<f64>,
                    series: &mut Vec<Vec<f64>>,
                    accounting: &mut Vec<StockAccounting>| {
        times.push(t);
        for (i, s) in series.iter_mut().enumerate() {
            s.push(engine.values[engine.model.offset(i)]);
        }
        for (n, acc) in accounting.iter_mut().enumerate() {
            acc.cumulative_net.push(cum_net[n]);
            acc.cumulative_clip.push(cum_clip[n]);
        }
    };

    save(
        &engine,
        spec.start,
        &cum_net,
        &cum_clip,
        &mut times,
        &mut series,
        &mut accounting,
    );

    for step in 1..=n_steps {
        let t_prev = spec.start + (step - 1) as f64 * spec.dt;
        let (applied, clipped) = engine.step(&stocks, t_prev, spec.dt, spec.method)?;
        for n in 0..stocks.len() {
            cum_net[n] += applied[n];
            cum_clip[n] += clipped[n];
        }
        if step % save_every == 0 {
            let t = spec.start + step as f64 * spec.dt;
            save(
                &engine,
                t,
                &cum_net,
                &cum_clip,
                &mut times,
                &mut series,
                &mut accounting,
            );
        }
    }

    Ok(RunResult {
        scenario: scenario.to_string(),
        spec: spec.clone(),
        times,
        names: model.instances.iter().map(|i| i.name.clone()).collect(),
        kinds: model.instances.iter().map(|i| i.kind).collect(),
        series,
        stock_accounting: accounting,
    })
}

/// Per-stock conservation defect of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationRow {
    pub stock: String,
    /// max over saved times of |S(t) - S(0) - integral - clip|
    pub max_defect: f64,
    pub max_abs_value: f64,
    pub total_clip: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservationReport {
    pub rows: Vec<ConservationRow>,
}

impl ConservationReport {
    /// True if every stock's defect is below `rel_tol` times its magnitude.
    pub fn within(&self, rel_tol: f64) -> bool {
        self.rows
            .iter()
            .all(|r| r.max_defect <= rel_tol * r.max_abs_value.max(1.0))
    }
}

/// Check the discrete conservation identity
/// `S(t) = S(0) + integral(net flow) + clip` against the integrator's own
/// recorded sums, per stock.
pub fn check_conservation(result: &RunResult, model: &CompiledModel) -> ConservationReport {
    let mut rows = Vec::new();
    for acc in &result.stock_accounting {
        let name = &model.instances[acc.instance].name;
        let series = result
            .series_by_name(name)
            .expect("stock series present in its own run");
        let s0 = series[0];
        let mut max_defect = 0.0f64;
        let mut max_abs = 0.0f64;
        for (k, &s) in series.iter().enumerate() {
            let expected = s0 + acc.cumulative_net[k] + acc.cumulative_clip[k];
            let defect = (s - expected).abs();
            max_defect = max_defect.max(defect);
            max_abs = max_abs.max(s.abs());
        }
        rows.push(ConservationRow {
            stock: name.clone(),
            max_defect,
            max_abs_value: max_abs,
            total_clip: *acc.cumulative_clip.last().unwrap_or(&0.0),
        });
    }
    ConservationReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_text;
    use crate::resolve::resolve;

    fn compiled(text: &str) -> CompiledModel {
        let file = parse_text("m.sdm", text).unwrap();
        crate::compile::compile(&resolve(&[file]).unwrap()).unwrap()
    }

    fn state(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn euler_single_step() {
        let m = compiled("flow f = 10\nstock S { initial = 100 outflows = [f] }");
        let (next, clips) =
            integrate_step(&m, &state(&[("S", 100.0)]), 0.0, 0.25, Method::Euler).unwrap();
        assert_eq!(next["S"], 97.5);
        assert_eq!(clips["S"], 0.0);
    }

    #[test]
    fn nonneg_floor_records_clip() {
        let m = compiled("flow f = 4\nstock S { initial = 0 outflows = [f] nonneg }");
        let (next, clips) =
            integrate_step(&m, &state(&[("S", 0.0)]), 0.0, 0.25, Method::Euler).unwrap();
        assert_eq!(next["S"], 0.0);
        assert_eq!(clips["S"], 1.0);
    }

    #[test]
    fn rk4_single_step_matches_exponential() {
        // dS/dt = -S, one rk4 step of 0.1 from S = 1
        let m = compiled("flow f = S\nstock S { initial = 1 outflows = [f] }");
        let (next, _) = integrate_step(&m, &state(&[("S", 1.0)]), 0.0, 0.1, Method::Rk4).unwrap();
        assert!((next["S"] - 0.9048375).abs() < 1e-7);
        assert!((next["S"] - libm::exp(-0.1)).abs() < 1e-6);
    }

    #[test]
    fn constant_stock_stays_constant() {
        let m = compiled("stock S { initial = 5 }");
        let spec = RunSpec::default();
        let run = simulate(&m, &spec).unwrap();
        assert_eq!(run.times.len(), 81);
        assert!(run.series_by_name("S").unwrap().iter().all(|&v| v == 5.0));
    }

    #[test]
    fn determinism_bit_identical() {
        let m = compiled(
            "param k = 0.3\nflow f = S * k\nstock S { initial = 1 outflows = [f] }",
        );
        let spec = RunSpec::default();
        let a = simulate(&m, &spec).unwrap();
        let b = simulate(&m, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_flow_is_reported() {
        let m = compiled("param z = 0\nflow f = 1 / z\nstock S { initial = 0 inflows = [f] }");
        let err = simulate(&m, &RunSpec::default()).unwrap_err();
        match err {
            SimError::NonFinite { variable, time } => {
                assert_eq!(variable, "f");
                assert_eq!(time, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn conservation_identity_holds() {
        let m = compiled(
            "param k = 0.5\nflow fin = 3\nflow fout = S * k\nstock S { initial = 10 inflows = [fin] outflows = [fout] }",
        );
        let run = simulate(&m, &RunSpec::default()).unwrap();
        let report = check_conservation(&run, &m);
        assert!(report.within(1e-12), "{report:?}");
    }

    #[test]
    fn conservation_with_clipping() {
        let m = compiled("flow f = 4\nstock S { initial = 1 outflows = [f] nonneg }");
        let run = simulate(&m, &RunSpec::default()).unwrap();
        let report = check_conservation(&run, &m);
        assert!(report.within(1e-12), "{report:?}");
        assert!(report.rows[0].total_clip > 0.0);
        assert_eq!(*run.series_by_name("S").unwrap().last().unwrap(), 0.0);
    }

    #[test]
    fn overrides_replace_base_values() {
        let m = compiled("param k = 1\nflow f = k\nstock S { initial = 0 inflows = [f] }");
        let mut spec = RunSpec::default();
        spec.overrides.insert("k".to_string(), 2.0);
        let run = simulate(&m, &spec).unwrap();
        let s = run.series_by_name("S").unwrap();
        assert!((s[s.len() - 1] - 40.0).abs() < 1e-9);

        spec.overrides.clear();
        spec.overrides.insert("nope".to_string(), 1.0);
        assert!(matches!(
            simulate(&m, &spec),
            Err(SimError::UnknownOverride(_))
        ));
    }

    #[test]
    fn save_interval_validation() {
        let mut spec = RunSpec::default();
        spec.dt = 0.3;
        assert!(matches!(
            spec.validate(),
            Err(SimError::InvalidSpec(_))
        ));
    }
}
