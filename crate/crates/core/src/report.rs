//! Verification reports and their canonical serializations.
//!
//! JSON output has sorted keys and every float printed with 17 significant
//! digits, so a fixed model, check, seed and parameter set always yields the
//! same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::checks::CheckOptions;
use crate::dynamics::Conventions;
use crate::expr::{Status, Verdict};
use crate::{Error, Result};

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Zero,
    Nonzero,
}

/// One named identity check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub expect: Expect,
    /// Whether a failure of this check fails the whole report.
    pub required: bool,
    pub verdict: Verdict,
    pub passed: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub expressions: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, expect: Expect, verdict: Verdict) -> CheckResult {
        let passed = match expect {
            Expect::Zero => verdict.status == Status::Zero,
            Expect::Nonzero => verdict.status == Status::Nonzero,
        };
        CheckResult {
            name: name.into(),
            expect,
            required: true,
            verdict,
            passed,
            values: BTreeMap::new(),
            expressions: BTreeMap::new(),
            note: None,
        }
    }

    pub fn zero(name: impl Into<String>, verdict: Verdict) -> CheckResult {
        CheckResult::new(name, Expect::Zero, verdict)
    }

    pub fn nonzero(name: impl Into<String>, verdict: Verdict) -> CheckResult {
        CheckResult::new(name, Expect::Nonzero, verdict)
    }

    pub fn optional(mut self) -> CheckResult {
        self.required = false;
        self
    }

    pub fn required(mut self, required: bool) -> CheckResult {
        self.required = required;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> CheckResult {
        self.note = Some(note.into());
        self
    }

    pub fn value(mut self, key: impl Into<String>, v: f64) -> CheckResult {
        self.values.insert(key.into(), v);
        self
    }

    pub fn expression(mut self, key: impl Into<String>, e: impl Into<String>) -> CheckResult {
        self.expressions.insert(key.into(), e.into());
        self
    }

    /// A required check that did not pass.
    pub fn fails_report(&self) -> bool {
        self.required && !self.passed
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub model: ModelInfo,
    pub options: CheckOptions,
    pub conventions: Conventions,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, model: ModelInfo, options: CheckOptions, conventions: Conventions, mut checks: Vec<CheckResult>) -> Report {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = !checks.iter().any(CheckResult::fails_report);
        Report {
            schema_version: SCHEMA_VERSION,
            tool: "cartanlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            model,
            options,
            conventions,
            checks,
            passed,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    CsvSummary,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "csv-summary" => Ok(Format::CsvSummary),
            other => Err(Error::Model(format!("unknown format `{other}`; expected json or csv-summary"))),
        }
    }
}

pub fn emit(report: &Report, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_canonical_json(report).into_bytes(),
        Format::CsvSummary => csv_summary(report).into_bytes(),
    }
}

/// Canonical JSON for any serializable value.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report values serialize");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

/// Floats with 17 significant digits; integers stay integers.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        // keeps -0.0 and 0.0 apart from integer zero
        return if x.is_sign_negative() { "-0.0000000000000000e0".into() } else { "0.0000000000000000e0".into() };
    }
    format!("{x:.16e}")
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) if !n.is_f64() => {
                let _ = write!(out, "{i}");
            }
            (_, Some(u), _) if !n.is_f64() => {
                let _ = write!(out, "{u}");
            }
            (_, _, Some(f)) => out.push_str(&format_float(f)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            out.push_str("{\n");
            for (i, (k, item)) in sorted.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(k).expect("keys serialize"));
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < sorted.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per check: name, expectation, requirement, status, method,
/// max residual, samples, tolerance, seed, pass.
pub fn csv_summary(report: &Report) -> String {
    let mut out = String::from("check,expect,required,status,method,max_abs_residual,samples,tolerance,seed,passed\n");
    for c in &report.checks {
        let v = &c.verdict;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&c.name),
            serde_json::to_value(c.expect).expect("enum").as_str().unwrap_or_default(),
            c.required,
            serde_json::to_value(v.status).expect("enum").as_str().unwrap_or_default(),
            serde_json::to_value(v.method).expect("enum").as_str().unwrap_or_default(),
            format_float(v.max_abs_residual),
            v.samples_used,
            format_float(v.tolerance),
            v.seed,
            c.passed
        );
    }
    out
}
