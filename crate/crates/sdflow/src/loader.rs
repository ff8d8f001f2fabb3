//! Reading `.sdm` files from disk into a compiled model.

use std::fmt;
use std::path::{Path, PathBuf};

use sdflow_core::{compile, CompileError, CompiledModel, Diagnostic, ModelDefinition};

#[derive(Debug)]
pub enum LoadError {
    /// Unreadable file (missing, permissions, encoding).
    Io { path: PathBuf, error: std::io::Error },
    /// Lex/parse/resolve diagnostics, printable as `file:line:col: ...`.
    Diagnostics(Vec<Diagnostic>),
    Compile(CompileError),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io { path, error } => write!(f, "{}: {}", path.display(), error),
            LoadError::Diagnostics(diags) => {
                for (i, d) in diags.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
            LoadError::Compile(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LoadError {}

pub struct LoadedModel {
    pub definition: ModelDefinition,
    pub compiled: CompiledModel,
    /// (path, file contents) in load order, for manifests and hashing.
    pub sources: Vec<(PathBuf, String)>,
}

/// Read, parse, resolve, and compile one or more `.sdm` files as a single
/// model. Scenario blocks from any of the files are kept on the
/// definition.
pub fn load_model_files<P: AsRef<Path>>(paths: &[P]) -> Result<LoadedModel, LoadError> {
    let mut sources = Vec::new();
    for p in paths {
        let path = p.as_ref().to_path_buf();
        let text = std::fs::read_to_string(&path).map_err(|error| LoadError::Io {
            path: path.clone(),
            error,
        })?;
        sources.push((path, text));
    }
    let named: Vec<(String, String)> = sources
        .iter()
        .map(|(p, t)| (p.display().to_string(), t.clone()))
        .collect();
    let definition = sdflow_core::load_sources(&named).map_err(LoadError::Diagnostics)?;
    let compiled = compile(&definition).map_err(LoadError::Compile)?;
    Ok(LoadedModel {
        definition,
        compiled,
        sources,
    })
}

/// Parse and compile in-memory sources (used for the bundled fixtures).
pub fn load_model_strings(sources: &[(&str, &str)]) -> Result<LoadedModel, LoadError> {
    let named: Vec<(String, String)> = sources
        .iter()
        .map(|(n, t)| (n.to_string(), t.to_string()))
        .collect();
    let definition = sdflow_core::load_sources(&named).map_err(LoadError::Diagnostics)?;
    let compiled = compile(&definition).map_err(LoadError::Compile)?;
    Ok(LoadedModel {
        definition,
        compiled,
        sources: sources
            .iter()
            .map(|(n, t)| (PathBuf::from(n), t.to_string()))
            .collect(),
    })
}
