//! Analytic oracles for the integrator: fixtures with closed-form
//! solutions, frozen here independently of the engine.

use sdflow_core::{
    compile, load_source, simulate, solve_equilibrium, EquilibriumSpec, Method, RunSpec,
};

fn compiled(text: &str) -> sdflow_core::CompiledModel {
    compile(&load_source("oracle.sdm", text).unwrap()).unwrap()
}

const DECAY: &str = "param tau = 5\nflow outflow = S / tau\nstock S { initial = 1 outflows = [outflow] }";

/// Closed form of the euler-discretized decay: S_n = (1 - dt/tau)^n.
fn euler_decay_closed_form(dt: f64, tau: f64, t: f64) -> f64 {
    let n = (t / dt).round() as i32;
    (1.0 - dt / tau).powi(n)
}

#[test]
fn euler_decay_matches_discrete_closed_form_exactly() {
    let m = compiled(DECAY);
    let spec = RunSpec {
        stop: 5.0,
        ..RunSpec::default()
    };
    let run = simulate(&m, &spec).unwrap();
    for (k, &t) in run.times.iter().enumerate() {
        let expected = euler_decay_closed_form(spec.dt, 5.0, t);
        let got = run.series_by_name("S").unwrap()[k];
        assert!(
            (got - expected).abs() < 1e-12,
            "t={t}: {got} vs {expected}"
        );
    }
    // euler at dt = 0.0625 lands within 2.4e-3 of the continuous solution
    let s5 = run.value_at("S", 5.0).unwrap();
    assert!((s5 - (-1.0f64).exp()).abs() < 2.4e-3);
}

#[test]
fn rk4_decay_matches_continuous_solution() {
    let m = compiled(DECAY);
    let spec = RunSpec {
        stop: 20.0,
        method: Method::Rk4,
        ..RunSpec::default()
    };
    let run = simulate(&m, &spec).unwrap();
    // 0.2% relative at 20 years (value e^-4), and much better in practice
    let s20 = run.value_at("S", 20.0).unwrap();
    let exact = (-4.0f64).exp();
    assert!(((s20 - exact) / exact).abs() < 0.002, "{s20} vs {exact}");
    assert!(((s20 - exact) / exact).abs() < 1e-9);
    // one explicit step: e^-0.1 to 1e-6 (checked at the op level too)
    let s = run.value_at("S", 0.25).unwrap();
    assert!(((s - (-0.05f64).exp()) / s).abs() < 1e-9);
}

const CHAIN: &str = "flow fin = 100\nflow f1 = S1 * 0.5\nflow f2 = S2 * 0.25\nstock S1 { initial = 0 inflows = [fin] outflows = [f1] }\nstock S2 { initial = 0 inflows = [f1] outflows = [f2] }";

/// Closed forms for the two-stage chain from empty initial conditions.
fn chain_s1(t: f64) -> f64 {
    200.0 * (1.0 - (-0.5 * t).exp())
}

fn chain_s2(t: f64) -> f64 {
    400.0 + 400.0 * (-0.5 * t).exp() - 800.0 * (-0.25 * t).exp()
}

#[test]
fn two_stage_chain_matches_closed_form() {
    let m = compiled(CHAIN);
    let spec = RunSpec {
        stop: 20.0,
        method: Method::Rk4,
        ..RunSpec::default()
    };
    let run = simulate(&m, &spec).unwrap();
    for (k, &t) in run.times.iter().enumerate() {
        for (name, exact) in [("S1", chain_s1(t)), ("S2", chain_s2(t))] {
            let got = run.series_by_name(name).unwrap()[k];
            if exact.abs() > 1e-6 {
                assert!(
                    ((got - exact) / exact).abs() < 0.002,
                    "{name} at t={t}: {got} vs {exact}"
                );
            }
        }
    }
    let s2 = run.value_at("S2", 20.0).unwrap();
    assert!(((s2 - chain_s2(20.0)) / chain_s2(20.0)).abs() < 1e-8);
}

#[test]
fn chain_equilibrium_matches_analytic_balance() {
    let m = compiled(CHAIN);
    let spec = EquilibriumSpec {
        target_stocks: vec!["S1".into(), "S2".into()],
        tolerance: 1e-9,
        ..EquilibriumSpec::default()
    };
    let sol = solve_equilibrium(&m, &spec).unwrap();
    // analytic balances: S1* = 100/0.5, S2* = (0.5*S1*)/0.25
    assert!(((sol.stocks["S1"] - 200.0) / 200.0).abs() <= 1e-8);
    assert!(((sol.stocks["S2"] - 400.0) / 400.0).abs() <= 1e-8);
}

#[test]
fn halving_dt_converges_on_smooth_fixture() {
    let m = compiled(CHAIN);
    let coarse = simulate(
        &m,
        &RunSpec {
            stop: 20.0,
            ..RunSpec::default()
        },
    )
    .unwrap();
    let fine = simulate(
        &m,
        &RunSpec {
            stop: 20.0,
            dt: 0.03125,
            ..RunSpec::default()
        },
    )
    .unwrap();
    assert_eq!(coarse.times, fine.times);
    for name in ["S1", "S2"] {
        let a = coarse.series_by_name(name).unwrap();
        let b = fine.series_by_name(name).unwrap();
        assert!(sup_norm_rel(a, b) < 0.005, "{name}: {}", sup_norm_rel(a, b));
    }
}

/// max_t |a - b| over max_t |a|, skipping numerically empty series.
fn sup_norm_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale < 1e-6 {
        return 0.0;
    }
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

#[test]
fn euler_and_rk4_agree_at_small_dt() {
    let m = compiled(CHAIN);
    let euler = simulate(
        &m,
        &RunSpec {
            stop: 20.0,
            ..RunSpec::default()
        },
    )
    .unwrap();
    let rk4 = simulate(
        &m,
        &RunSpec {
            stop: 20.0,
            method: Method::Rk4,
            ..RunSpec::default()
        },
    )
    .unwrap();
    for name in ["S1", "S2"] {
        let a = euler.series_by_name(name).unwrap();
        let b = rk4.series_by_name(name).unwrap();
        assert!(sup_norm_rel(b, a) < 0.01, "{name}: {}", sup_norm_rel(b, a));
    }
}
