//! Stdout number formatting and error reporting.

use leadtime_core::Error as CoreError;
use serde::Serialize;

/// Fixed six significant digits, trailing zeros kept so columns line up and
/// golden files stay stable. Scientific notation outside `1e-5..1e6`.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..6).contains(&exp) {
        format!("{x:.*}", (5 - exp) as usize)
    } else {
        sci
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_input_error() => 1,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Serialize)]
struct JsonError {
    kind: &'static str,
    code: i32,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    causes: Vec<String>,
}

fn details(e: &CoreError) -> Option<serde_json::Value> {
    match e {
        CoreError::Row(r) => serde_json::to_value(r).ok(),
        CoreError::InvalidSpec(fields) => serde_json::to_value(fields).ok(),
        CoreError::GappedSeries { missing } => {
            serde_json::to_value(missing.iter().map(ToString::to_string).collect::<Vec<_>>()).ok()
        }
        CoreError::Context { source, .. } => details(source),
        _ => None,
    }
}

pub fn report(err: &CliError, json: bool) {
    let code = err.exit_code();
    if !json {
        eprintln!("error: {err}");
        return;
    }
    let mut causes = Vec::new();
    let mut src = std::error::Error::source(err);
    while let Some(s) = src {
        causes.push(s.to_string());
        src = s.source();
    }
    let body = JsonError {
        kind: if code == 1 { "input" } else { "computation" },
        code,
        message: err.to_string(),
        details: match err {
            CliError::Core(e) => details(e),
            CliError::Usage(_) => None,
        },
        causes,
    };
    eprintln!("{}", serde_json::json!({ "error": body }));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.270_783_188), "0.270783");
        assert_eq!(sig6(1_047.826_086), "1047.83");
        assert_eq!(sig6(-0.126_811_594), "-0.126812");
        assert_eq!(sig6(0.0), "0.00000");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(999_999.7), "1.00000e6");
        assert_eq!(sig6(1.234_567e-7), "1.23457e-7");
        assert_eq!(sig6(9.999_996), "10.0000");
    }
}
