use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Format, Scenario};

pub const SCHEMA: &str = "pipframe/1";

/// One verdict: `passed` iff `residual ≤ tolerance`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        // NaN residuals fail
        Self { name: name.into(), passed: residual <= tolerance, residual, tolerance }
    }

    /// A count of violations, which must be zero.
    pub fn count(name: impl Into<String>, failures: usize) -> Self {
        Self::new(name, failures as f64, 0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub scenario: Scenario,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub results: serde_json::Value,
}

impl Report {
    pub fn new(scenario: Scenario, checks: Vec<Check>, results: serde_json::Value) -> Self {
        Self { schema: SCHEMA, passed: checks.iter().all(|c| c.passed), scenario, checks, results }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialise");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let sc = &self.scenario;
        let _ = writeln!(out, "{} [{}]", sc.name, if self.passed { "PASS" } else { "FAIL" });
        if !sc.summary.is_empty() {
            let _ = writeln!(out, "  {}", sc.summary);
        }
        let _ = writeln!(out, "  construction: {}", sc.construction.kind());
        let _ = writeln!(out, "  seed: {}", sc.seed);
        let _ = writeln!(out, "  checks:");
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "    {} {:width$}  residual {:.3e}  tolerance {:.3e}",
                if c.passed { "ok  " } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance,
            );
        }
        out
    }

    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if matches!(format, Format::Json | Format::Both) {
            let p = dir.join(format!("{stem}.json"));
            std::fs::write(&p, self.to_json())?;
            written.push(p);
        }
        if matches!(format, Format::Text | Format::Both) {
            let p = dir.join(format!("{stem}.txt"));
            std::fs::write(&p, self.to_text())?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Wall-clock timings, kept out of the report so reports stay reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub schema: &'static str,
    pub scenario: String,
    pub steps: Vec<(String, f64)>,
    pub total_seconds: f64,
}

impl Timings {
    pub fn write(&self, dir: &Path, stem: &str) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let p = dir.join(format!("{stem}.timings.json"));
        let mut s = serde_json::to_string_pretty(self).expect("timings serialise");
        s.push('\n');
        std::fs::write(&p, s)?;
        Ok(p)
    }
}
