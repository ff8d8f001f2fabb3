// scratch probe of the bundled model
fn main() {
    let model = sdflow::healthcare::load_bundled().expect("bundled model loads");
    println!("instances: {}", model.compiled.instances.len());
    let spec = sdflow::healthcare::baseline_spec();
    let run = sdflow_core::simulate(&model.compiled, &spec).expect("baseline runs");
    for metric in ["fractionTreated", "trust", "perceivedTPR", "actualTPR", "deathRate"] {
        for group in sdflow::healthcare::GROUPS {
            let v0 = sdflow::healthcare::metric_at(&run, metric, group, 0.0).unwrap();
            let v20 = sdflow::healthcare::metric_at(&run, metric, group, 20.0).unwrap();
            println!("{metric:>14}[{group:<15}] t0={v0:.6} t20={v20:.6} drift={:+.2e}", v20 - v0);
        }
    }
    // equilibrium residuals at the shipped initials
    let sol = sdflow_core::solve_equilibrium(&model.compiled, &sdflow::healthcare::equilibrium_spec());
    match sol {
        Ok(s) => {
            println!("solve iterations: {}", s.iterations);
            for (name, r) in &s.target_residuals { println!("  {name:<44} residual {r:.2e} value {:.3}", s.stocks[name]); }
        }
        Err(e) => println!("solve failed: {e}"),
    }
}
