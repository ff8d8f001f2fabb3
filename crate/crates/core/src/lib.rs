//! Core library for the sdflow toolkit: a fixed-step stock-and-flow
//! simulation engine, the `.sdm` model language front end (lexer, parser,
//! resolver, formatter), an equilibrium initializer, and timed policy
//! overlays for scenario comparison.
//!
//! The crate is `no_std` + `alloc` so the engine can be embedded anywhere;
//! file IO, CSV/SVG export, and the CLI live in the companion `sdflow`
//! crate.

#![no_std]

extern crate alloc;

pub mod ast;
pub mod compile;
pub mod diag;
pub mod equilibrium;
pub mod expr;
pub mod format;
pub mod lexer;
pub mod lookup;
pub mod model;
pub mod parser;
pub mod resolve;
pub mod scenario;
pub mod sim;
pub mod token;

pub use compile::{compile, CompileError, CompiledModel};
pub use diag::{Diagnostic, Severity};
pub use equilibrium::{solve_equilibrium, verify_equilibrium, EquilibriumSpec};
pub use lookup::{eval_lookup, LookupTable};
pub use model::ModelDefinition;
pub use scenario::{
    apply_scenario, compare, run_scenarios, CompareError, DeltaReport, Overlay, OverlayShape,
    Scenario, ScenarioError,
};
pub use sim::{
    check_conservation, integrate_step, safe_divide, simulate, simulate_named, ConservationReport,
    Method, RunResult, RunSpec, SimError,
};

/// Parse and resolve a source text in one call.
///
/// Convenience for the common front-end pipeline; returns either a resolved
/// [`ModelDefinition`] or every diagnostic collected along the way.
pub fn load_source(
    name: &str,
    text: &str,
) -> Result<ModelDefinition, alloc::vec::Vec<Diagnostic>> {
    let tokens = lexer::tokenize(name, text).map_err(|d| alloc::vec![d])?;
    let file = parser::parse(name, &tokens)?;
    resolve::resolve(&[file])
}

/// Parse and resolve several source files as one model, in order.
pub fn load_sources(
    sources: &[(alloc::string::String, alloc::string::String)],
) -> Result<ModelDefinition, alloc::vec::Vec<Diagnostic>> {
    let mut files = alloc::vec::Vec::new();
    let mut diags = alloc::vec::Vec::new();
    for (name, text) in sources {
        match lexer::tokenize(name, text) {
            Ok(tokens) => match parser::parse(name, &tokens) {
                Ok(file) => files.push(file),
                Err(mut ds) => diags.append(&mut ds),
            },
            Err(d) => diags.push(d),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    resolve::resolve(&files)
}
