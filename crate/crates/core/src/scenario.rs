//! Timed parameter overlays and multi-run comparison.
//!
//! A scenario is a named set of overlays (steps, pulses, ramps) plus
//! policy-switch settings. Applying one yields a new compiled model whose
//! parameter evaluation is time-dependent; the baseline model is never
//! mutated.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::compile::{CompiledModel, InstanceRole};
use crate::sim::{simulate_named, RunResult, RunSpec, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverlayShape {
    /// Value becomes `value` from `t0` on.
    Step { t0: f64, value: f64 },
    /// `delta` is added from `t0` on.
    AddStep { t0: f64, delta: f64 },
    /// Value is multiplied by `factor` from `t0` on.
    ScaleStep { t0: f64, factor: f64 },
    /// `height` is added on `[t0, t0 + width)`.
    Pulse { t0: f64, width: f64, height: f64 },
    /// Linear ramp starting at `t0`, holding after `t1`.
    Ramp { t0: f64, t1: f64, slope: f64 },
    /// Constant replacement for the whole run (policy switches).
    Switch { value: f64 },
}

impl OverlayShape {
    pub fn apply(&self, base: f64, t: f64) -> f64 {
        match *self {
            OverlayShape::Step { t0, value } => {
                if t >= t0 {
                    value
                } else {
                    base
                }
            }
            OverlayShape::AddStep { t0, delta } => {
                if t >= t0 {
                    base + delta
                } else {
                    base
                }
            }
            OverlayShape::ScaleStep { t0, factor } => {
                if t >= t0 {
                    base * factor
                } else {
                    base
                }
            }
            OverlayShape::Pulse { t0, width, height } => {
                if t >= t0 && t < t0 + width {
                    base + height
                } else {
                    base
                }
            }
            OverlayShape::Ramp { t0, t1, slope } => {
                if t >= t0 {
                    let held = if t < t1 { t } else { t1 };
                    base + slope * (held - t0)
                } else {
                    base
                }
            }
            OverlayShape::Switch { value } => value,
        }
    }
}

/// One overlay on a parameter instance (`element` set) or a whole
/// subscripted family (`element` empty).
#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    pub target: String,
    pub element: Option<String>,
    pub shape: OverlayShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub overlays: Vec<Overlay>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    UnknownTarget(String),
    KindMismatch(String),
    /// `baseline` is reserved for the un-overlaid run.
    ReservedName(String),
    Sim { scenario: String, error: SimError },
}

impl core::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ScenarioError::UnknownTarget(n) => write!(f, "unknown overlay target `{n}`"),
            ScenarioError::KindMismatch(n) => {
                write!(f, "overlay target `{n}` is not a parameter")
            }
            ScenarioError::ReservedName(n) => {
                write!(f, "scenario name `{n}` is reserved")
            }
            ScenarioError::Sim { scenario, error } => {
                write!(f, "scenario `{scenario}`: {error}")
            }
        }
    }
}

/// Attach a scenario's overlays to a copy of the model. The input model is
/// untouched.
pub fn apply_scenario(
    model: &CompiledModel,
    scenario: &Scenario,
) -> Result<CompiledModel, ScenarioError> {
    let mut out = model.clone();
    for overlay in &scenario.overlays {
        let key = match &overlay.element {
            Some(el) => alloc::format!("{}[{}]", overlay.target, el),
            None => overlay.target.clone(),
        };
        let targets: Vec<usize> = if let Some(i) = out.instance_index(&key) {
            alloc::vec![i]
        } else {
            let fam = out.family(&key);
            if fam.is_empty() {
                return Err(ScenarioError::UnknownTarget(key));
            }
            fam
        };
        for i in targets {
            match &mut out.instances[i].role {
                InstanceRole::Parameter {
                    base_value,
                    overlays,
                } => match overlay.shape {
                    OverlayShape::Switch { value } => *base_value = value,
                    shape => overlays.push(shape),
                },
                _ => return Err(ScenarioError::KindMismatch(key)),
            }
        }
    }
    Ok(out)
}

/// Run the baseline plus each scenario under the same spec. Results are
/// keyed by name (`baseline` plus scenario names) in a sorted map.
pub fn run_scenarios(
    model: &CompiledModel,
    baseline_spec: &RunSpec,
    scenarios: &[Scenario],
) -> Result<BTreeMap<String, RunResult>, ScenarioError> {
    let mut out = BTreeMap::new();
    let baseline = simulate_named(model, baseline_spec, "baseline").map_err(|error| {
        ScenarioError::Sim {
            scenario: "baseline".to_string(),
            error,
        }
    })?;
    out.insert("baseline".to_string(), baseline);

    for scenario in scenarios {
        if scenario.name == "baseline" {
            return Err(ScenarioError::ReservedName(scenario.name.clone()));
        }
        let overlaid = apply_scenario(model, scenario)?;
        let run =
            simulate_named(&overlaid, baseline_spec, &scenario.name).map_err(|error| {
                ScenarioError::Sim {
                    scenario: scenario.name.clone(),
                    error,
                }
            })?;
        out.insert(scenario.name.clone(), run);
    }
    Ok(out)
}

/// One metric-at-time comparison between two runs.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    /// Base metric name (subscript stripped).
    pub metric: String,
    /// Subscript element, when the metric is per-group.
    pub group: Option<String>,
    pub time: f64,
    pub baseline: f64,
    pub scenario: f64,
    pub absolute: f64,
    /// Absolute delta over the baseline magnitude; 0 when the baseline
    /// is ~0.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompareError {
    MisalignedGrids,
    UnknownMetric { name: String, available: Vec<String> },
    UnknownTime(f64),
}

impl core::fmt::Display for CompareError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CompareError::MisalignedGrids => write!(f, "runs have different time grids"),
            CompareError::UnknownMetric { name, .. } => write!(f, "unknown metric `{name}`"),
            CompareError::UnknownTime(t) => write!(f, "time {t} is not on the save grid"),
        }
    }
}

fn split_subscript(name: &str) -> (String, Option<String>) {
    match (name.find('['), name.ends_with(']')) {
        (Some(open), true) => (
            name[..open].to_string(),
            Some(name[open + 1..name.len() - 1].to_string()),
        ),
        _ => (name.to_string(), None),
    }
}

/// Compare two aligned runs at the given metric instances and times.
pub fn compare(
    baseline: &RunResult,
    scenario: &RunResult,
    metrics: &[String],
    at_times: &[f64],
) -> Result<Vec<DeltaReport>, CompareError> {
    if baseline.times.len() != scenario.times.len()
        || baseline
            .times
            .iter()
            .zip(&scenario.times)
            .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(CompareError::MisalignedGrids);
    }

    let mut out = Vec::new();
    for metric in metrics {
        let (b, s) = match (
            baseline.series_by_name(metric),
            scenario.series_by_name(metric),
        ) {
            (Some(b), Some(s)) => (b, s),
            _ => {
                return Err(CompareError::UnknownMetric {
                    name: metric.clone(),
                    available: baseline.names.clone(),
                });
            }
        };
        for &t in at_times {
            let k = baseline
                .time_index(t)
                .ok_or(CompareError::UnknownTime(t))?;
            let (base_name, group) = split_subscript(metric);
            let absolute = s[k] - b[k];
            out.push(DeltaReport {
                metric: base_name,
                group,
                time: t,
                baseline: b[k],
                scenario: s[k],
                absolute,
                relative: if b[k].abs() > 1e-12 {
                    absolute / b[k]
                } else {
                    0.0
                },
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile;
    use crate::parser::parse_text;
    use crate::resolve::resolve;

    const MODEL: &str = "param k = 1\nflow f = k\nstock S { initial = 0 inflows = [f] }";

    fn compiled(text: &str) -> CompiledModel {
        let file = parse_text("m.sdm", text).unwrap();
        compile(&resolve(&[file]).unwrap()).unwrap()
    }

    fn scenario(name: &str, target: &str, shape: OverlayShape) -> Scenario {
        Scenario {
            name: name.to_string(),
            overlays: alloc::vec![Overlay {
                target: target.to_string(),
                element: None,
                shape,
            }],
        }
    }

    #[test]
    fn scale_step_takes_effect_at_t0() {
        let m = compiled(MODEL);
        let scen = scenario("x", "k", OverlayShape::ScaleStep { t0: 5.0, factor: 1.15 });
        let overlaid = apply_scenario(&m, &scen).unwrap();
        let run = crate::sim::simulate(&overlaid, &RunSpec::default()).unwrap();
        let k = run.series_by_name("k").unwrap();
        let t = run.time_index(4.75).unwrap();
        assert_eq!(k[t], 1.0);
        let t = run.time_index(5.0).unwrap();
        assert_eq!(k[t], 1.15);
    }

    #[test]
    fn add_step_shifts_value() {
        let m = compiled("param tau = 5\nflow f = tau\nstock S { initial = 0 inflows = [f] }");
        let scen = scenario("x", "tau", OverlayShape::AddStep { t0: 5.0, delta: 3.0 });
        let run =
            crate::sim::simulate(&apply_scenario(&m, &scen).unwrap(), &RunSpec::default())
                .unwrap();
        let tau = run.series_by_name("tau").unwrap();
        assert_eq!(tau[run.time_index(4.75).unwrap()], 5.0);
        assert_eq!(tau[run.time_index(5.0).unwrap()], 8.0);
        assert_eq!(tau[run.time_index(20.0).unwrap()], 8.0);
    }

    #[test]
    fn step_beyond_horizon_is_identity() {
        let m = compiled(MODEL);
        let base = crate::sim::simulate(&m, &RunSpec::default()).unwrap();
        let scen = scenario("x", "k", OverlayShape::Step { t0: 100.0, value: 9.0 });
        let over = apply_scenario(&m, &scen).unwrap();
        let run = crate::sim::simulate_named(&over, &RunSpec::default(), "baseline").unwrap();
        assert_eq!(base.series, run.series);
    }

    #[test]
    fn identity_overlays_are_bitwise_identities() {
        let m = compiled(MODEL);
        let base = crate::sim::simulate(&m, &RunSpec::default()).unwrap();
        for shape in [
            OverlayShape::ScaleStep { t0: 5.0, factor: 1.0 },
            OverlayShape::AddStep { t0: 5.0, delta: 0.0 },
        ] {
            let over = apply_scenario(&m, &scenario("x", "k", shape)).unwrap();
            let run = crate::sim::simulate_named(&over, &RunSpec::default(), "baseline").unwrap();
            assert_eq!(base.series, run.series);
        }
    }

    #[test]
    fn overlay_locality_before_t0() {
        let m = compiled(MODEL);
        let base = crate::sim::simulate(&m, &RunSpec::default()).unwrap();
        let over =
            apply_scenario(&m, &scenario("x", "k", OverlayShape::Step { t0: 5.0, value: 2.0 }))
                .unwrap();
        let run = crate::sim::simulate(&over, &RunSpec::default()).unwrap();
        let cutoff = run.time_index(5.0).unwrap();
        for i in 0..run.names.len() {
            for k in 0..cutoff {
                assert_eq!(base.series[i][k].to_bits(), run.series[i][k].to_bits());
            }
        }
    }

    #[test]
    fn baseline_immutability() {
        let m = compiled(MODEL);
        let before = crate::sim::simulate(&m, &RunSpec::default()).unwrap();
        let _ = apply_scenario(&m, &scenario("x", "k", OverlayShape::Switch { value: 7.0 }))
            .unwrap();
        let after = crate::sim::simulate(&m, &RunSpec::default()).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn run_scenarios_keys_and_determinism() {
        let m = compiled(MODEL);
        let spec = RunSpec::default();
        let empty = run_scenarios(&m, &spec, &[]).unwrap();
        assert_eq!(empty.len(), 1);
        assert!(empty.contains_key("baseline"));

        let s1 = scenario("a", "k", OverlayShape::ScaleStep { t0: 5.0, factor: 2.0 });
        let s2 = scenario("b", "k", OverlayShape::ScaleStep { t0: 5.0, factor: 2.0 });
        let runs = run_scenarios(&m, &spec, &[s1, s2]).unwrap();
        assert_eq!(runs.len(), 3);
        assert_eq!(runs["a"].series, runs["b"].series);
    }

    #[test]
    fn unknown_target_and_kind_mismatch() {
        let m = compiled(MODEL);
        let err = apply_scenario(&m, &scenario("x", "zzz", OverlayShape::Switch { value: 1.0 }))
            .unwrap_err();
        assert!(matches!(err, ScenarioError::UnknownTarget(_)));
        let err = apply_scenario(&m, &scenario("x", "S", OverlayShape::Switch { value: 1.0 }))
            .unwrap_err();
        assert!(matches!(err, ScenarioError::KindMismatch(_)));
    }

    #[test]
    fn compare_identical_runs_zero_deltas() {
        let m = compiled(MODEL);
        let a = crate::sim::simulate(&m, &RunSpec::default()).unwrap();
        let b = crate::sim::simulate(&m, &RunSpec::default()).unwrap();
        let deltas = compare(&a, &b, &["S".to_string()], &[10.0, 20.0]).unwrap();
        assert_eq!(deltas.len(), 2);
        assert!(deltas.iter().all(|d| d.absolute == 0.0));
    }

    #[test]
    fn compare_rejects_misaligned_grids() {
        let m = compiled(MODEL);
        let a = crate::sim::simulate(&m, &RunSpec::default()).unwrap();
        let spec = RunSpec {
            stop: 10.0,
            ..RunSpec::default()
        };
        let b = crate::sim::simulate(&m, &spec).unwrap();
        assert_eq!(
            compare(&a, &b, &["S".to_string()], &[5.0]).unwrap_err(),
            CompareError::MisalignedGrids
        );
    }

    #[test]
    fn pulse_and_ramp_shapes() {
        assert_eq!(OverlayShape::Pulse { t0: 2.0, width: 1.0, height: 4.0 }.apply(1.0, 2.5), 5.0);
        assert_eq!(OverlayShape::Pulse { t0: 2.0, width: 1.0, height: 4.0 }.apply(1.0, 3.0), 1.0);
        let ramp = OverlayShape::Ramp { t0: 2.0, t1: 4.0, slope: 0.5 };
        assert_eq!(ramp.apply(1.0, 1.0), 1.0);
        assert_eq!(ramp.apply(1.0, 3.0), 1.5);
        assert_eq!(ramp.apply(1.0, 10.0), 2.0);
    }
}
