//! The bundled healthcare diagnosis model: fixture access, metric
//! extraction, the equilibrium setup, and the standard policy-run suite.

use std::collections::BTreeMap;

use sdflow_core::{
    simulate_named, EquilibriumSpec, RunResult, RunSpec, Scenario, ScenarioError,
};

use crate::loader::{load_model_strings, LoadError, LoadedModel};

pub const MODEL_SOURCE: &str = include_str!("../../../model/healthcare_ai.sdm");
pub const CALIBRATION_SOURCE: &str = include_str!("../../../model/calibration.sdm");
pub const SCENARIOS_SOURCE: &str = include_str!("../../../model/scenarios.sdm");

pub const MODEL_PATH: &str = "model/healthcare_ai.sdm";
pub const CALIBRATION_PATH: &str = "model/calibration.sdm";
pub const SCENARIOS_PATH: &str = "model/scenarios.sdm";

pub const GROUPS: [&str; 2] = ["blackAmericans", "whiteAmericans"];
pub const BLACK: &str = "blackAmericans";
pub const WHITE: &str = "whiteAmericans";

/// Reported metrics, one series per group per run.
pub const METRICS: [&str; 6] = [
    "fractionTreated",
    "fractionTreatedCumulative",
    "trust",
    "perceivedTPR",
    "actualTPR",
    "deathRate",
];

/// The scenario names shipped in scenarios.sdm, in report order.
pub const POLICIES: [&str; 4] = [
    "increasedScreening",
    "amplifyPositiveExperiences",
    "collectDataAverageGated",
    "collectDataGroupGated",
];

/// Load the bundled model, calibration, and scenarios.
pub fn load_bundled() -> Result<LoadedModel, LoadError> {
    load_model_strings(&[
        (MODEL_PATH, MODEL_SOURCE),
        (CALIBRATION_PATH, CALIBRATION_SOURCE),
        (SCENARIOS_PATH, SCENARIOS_SOURCE),
    ])
}

/// Load the bundled structure with a replacement calibration (used by the
/// acceptance harness's perturbed-calibration checks).
pub fn load_with_calibration(calibration: &str) -> Result<LoadedModel, LoadError> {
    load_model_strings(&[
        (MODEL_PATH, MODEL_SOURCE),
        ("calibration.sdm", calibration),
        (SCENARIOS_PATH, SCENARIOS_SOURCE),
    ])
}

/// Stocks of the in-system screening/treatment chain (solved for
/// equilibrium), in flow order.
pub const CHAIN_STOCKS: [&str; 6] = [
    "peopleUndiagnosed",
    "peopleBeingScreened",
    "diagnosedAwaitingTreatment",
    "undetectedProgressing",
    "peopleInTreatmentEarly",
    "peopleInTreatmentLate",
];

/// Stocks held at configured/derived initial values during the solve.
/// Cumulative counters are in neither set: they accumulate by design.
pub const FROZEN_STOCKS: [&str; 7] = [
    "trustInMedicalCare",
    "memoryOfPositiveExperiences",
    "memoryOfDeaths",
    "exogenousTrustChangeRate",
    "actualTruePositiveRate",
    "perceivedTruePositiveRate",
    "trainingDataSamples",
];

/// Equilibrium setup for the bundled model. The damping is below the
/// default because the fastest chain stock drains at ~6/year.
pub fn equilibrium_spec() -> EquilibriumSpec {
    EquilibriumSpec {
        target_stocks: CHAIN_STOCKS.iter().map(|s| s.to_string()).collect(),
        frozen_stocks: FROZEN_STOCKS.iter().map(|s| s.to_string()).collect(),
        damping: 0.3,
        ..EquilibriumSpec::default()
    }
}

/// The standard 20-year spec all policy comparisons use.
pub fn baseline_spec() -> RunSpec {
    RunSpec::default()
}

/// One extracted metric trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub metric: String,
    pub group: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn instance(metric: &str, group: &str) -> Option<String> {
    let base = match metric {
        "fractionTreated" => "fractionTreated",
        "trust" => "trustInMedicalCare",
        "perceivedTPR" => "perceivedTruePositiveRate",
        "actualTPR" => "actualTruePositiveRate",
        "deathRate" => "deathFraction",
        _ => return None,
    };
    Some(format!("{base}[{group}]"))
}

/// Extract one metric's series for one group.
pub fn metric_series(run: &RunResult, metric: &str, group: &str) -> Option<Vec<f64>> {
    if metric == "fractionTreatedCumulative" {
        let treated = run.series_by_name(&format!("cumulativeTreated[{group}]"))?;
        let cases = run.series_by_name(&format!("cumulativeCases[{group}]"))?;
        let flow = run.series_by_name(&format!("fractionTreated[{group}]"))?;
        return Some(
            treated
                .iter()
                .zip(cases)
                .zip(flow)
                .map(|((&t, &c), &f)| sdflow_core::safe_divide(t, c, f))
                .collect(),
        );
    }
    run.series_by_name(&instance(metric, group)?)
        .map(|s| s.to_vec())
}

/// All reported metric series of a run over the bundled model.
pub fn metrics(run: &RunResult) -> Vec<MetricSeries> {
    let mut out = Vec::new();
    for metric in METRICS {
        for group in GROUPS {
            if let Some(values) = metric_series(run, metric, group) {
                out.push(MetricSeries {
                    metric: metric.to_string(),
                    group: group.to_string(),
                    times: run.times.clone(),
                    values,
                });
            }
        }
    }
    out
}

/// Metric value at a year mark (must lie on the save grid).
pub fn metric_at(run: &RunResult, metric: &str, group: &str, year: f64) -> Option<f64> {
    let series = metric_series(run, metric, group)?;
    Some(series[run.time_index(year)?])
}

/// Backward slope of a metric at a year mark, per year.
pub fn metric_slope(run: &RunResult, metric: &str, group: &str, year: f64) -> Option<f64> {
    let series = metric_series(run, metric, group)?;
    let k1 = run.time_index(year)?;
    let k0 = run.time_index(year - 1.0)?;
    Some(series[k1] - series[k0])
}

/// Run names produced by [`run_policy_suite`]: the 20-year baseline and
/// four policies, plus 40-year runs of the baseline and the
/// positive-experience policy.
pub const SUITE_RUNS: [&str; 7] = [
    "baseline",
    "increasedScreening",
    "amplifyPositiveExperiences",
    "collectDataAverageGated",
    "collectDataGroupGated",
    "baseline@40",
    "amplifyPositiveExperiences@40",
];

/// Run the baseline plus every bundled policy (20y), and the 40-year runs
/// the long-horizon patterns need.
pub fn run_policy_suite(
    model: &LoadedModel,
) -> Result<BTreeMap<String, RunResult>, ScenarioError> {
    let spec = baseline_spec();
    let scenarios: Vec<Scenario> = model.definition.scenarios.clone();
    let mut runs = sdflow_core::run_scenarios(&model.compiled, &spec, &scenarios)?;

    let long_spec = RunSpec {
        stop: 40.0,
        ..baseline_spec()
    };
    let long_base =
        simulate_named(&model.compiled, &long_spec, "baseline@40").map_err(|error| {
            ScenarioError::Sim {
                scenario: "baseline@40".to_string(),
                error,
            }
        })?;
    runs.insert("baseline@40".to_string(), long_base);

    if let Some(amplify) = model.definition.scenario("amplifyPositiveExperiences") {
        let overlaid = sdflow_core::apply_scenario(&model.compiled, amplify)?;
        let long = simulate_named(&overlaid, &long_spec, "amplifyPositiveExperiences@40")
            .map_err(|error| ScenarioError::Sim {
                scenario: "amplifyPositiveExperiences@40".to_string(),
                error,
            })?;
        runs.insert("amplifyPositiveExperiences@40".to_string(), long);
    }
    Ok(runs)
}
