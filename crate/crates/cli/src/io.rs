use std::fmt;
use std::fs;
use std::path::Path;

use renyi_core::Error;
use serde::de::DeserializeOwned;
use serde_json::Value;

/// Failure reported as `{"error": code, "detail": ...}` with exit status 2.
#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub detail: String,
}

impl CliError {
    pub fn new(code: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            detail: detail.into(),
        }
    }

    pub fn usage(detail: impl Into<String>) -> Self {
        Self::new("usage", detail)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.code, "detail": self.detail }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.detail)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::new("parse", format!("{}: {e}", path.display())))
}

/// Writes `text` to `out`, or to stdout when `out` is `None`.
pub fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::new("io", format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// JSON number, or `"inf"`, `"-inf"`, `"nan"` for non-finite values.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v.is_nan() {
        Value::from("nan")
    } else if v > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

/// Shortest round-trip decimal form of `v` for CSV cells.
pub fn cell(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

pub fn parse_list<T>(s: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            parse(tok).ok_or_else(|| CliError::usage(format!("bad {what} token {tok:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 0.1, 1.0 / 3.0, 1e-300, 2.2314355131420976e-1] {
            let s = cell(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let j = num(v).to_string();
            assert_eq!(j.parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::INFINITY), Value::from("inf"));
        assert_eq!(cell(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("2, 3", "dim", |t| t.parse::<usize>().ok()).unwrap(), vec![2, 3]);
        assert!(parse_list("2,x", "dim", |t| t.parse::<usize>().ok()).is_err());
    }
}
