//! CSV export and import of run results.
//!
//! Format: header `time,<variable[subscript]>,...`, values as fixed
//! 9-significant-digit decimals, LF line endings, time ascending. Output
//! is byte-deterministic for a given run.

use std::fmt::Write as _;

use sdflow_core::{RunResult, RunSpec};

/// Render a finite value as a plain decimal with 9 significant digits.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    // round to 9 significant digits via the exponent form, then rebuild a
    // plain decimal so output never carries `e` notation
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 9);

    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if exp >= 8 {
        // all digits before the point, pad with zeros
        out.push_str(&digits);
        for _ in 0..(exp - 8) {
            out.push('0');
        }
    } else if exp >= 0 {
        let split = (exp + 1) as usize;
        out.push_str(&digits[..split]);
        let frac = digits[split..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    } else {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(digits.trim_end_matches('0'));
    }
    if out == "-0" {
        return "0".to_string();
    }
    out
}

/// Serialize a run as CSV.
pub fn to_csv(run: &RunResult) -> String {
    let mut out = String::new();
    out.push_str("time");
    for name in &run.names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (k, &t) in run.times.iter().enumerate() {
        let _ = write!(out, "{}", format_value(t));
        for s in &run.series {
            out.push(',');
            out.push_str(&format_value(s[k]));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug)]
pub enum CsvError {
    Empty,
    MissingTimeColumn,
    Ragged { line: usize },
    BadNumber { line: usize, column: usize },
}

impl std::fmt::Display for CsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CsvError::Empty => write!(f, "empty CSV"),
            CsvError::MissingTimeColumn => write!(f, "first column must be `time`"),
            CsvError::Ragged { line } => write!(f, "line {line}: wrong number of fields"),
            CsvError::BadNumber { line, column } => {
                write!(f, "line {line}, field {column}: not a number")
            }
        }
    }
}

impl std::error::Error for CsvError {}

/// Read a CSV produced by [`to_csv`] back into a bare run result (kinds
/// are unknown and stock accounting is empty).
pub fn from_csv(text: &str, name: &str) -> Result<RunResult, CsvError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(CsvError::Empty)?;
    let mut cols = header.split(',');
    if cols.next() != Some("time") {
        return Err(CsvError::MissingTimeColumn);
    }
    let names: Vec<String> = cols.map(|c| c.to_string()).collect();

    let mut times = Vec::new();
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() + 1 {
            return Err(CsvError::Ragged { line: i + 1 });
        }
        let parse = |s: &str, column: usize| {
            s.parse::<f64>().map_err(|_| CsvError::BadNumber {
                line: i + 1,
                column,
            })
        };
        times.push(parse(fields[0], 1)?);
        for (c, field) in fields[1..].iter().enumerate() {
            series[c].push(parse(field, c + 2)?);
        }
    }
    Ok(RunResult {
        scenario: name.to_string(),
        spec: RunSpec::default(),
        times,
        kinds: vec![sdflow_core::model::VarKind::Auxiliary; names.len()],
        names,
        series,
        stock_accounting: Vec::new(),
    })
}
