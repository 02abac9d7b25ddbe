// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::REFERENCE_VALUES;
use crate::sim::AggregateReport;

use super::spec::ExperimentSpec;

pub const CSV_HEADER: &str = "n,f,alpha,variant,strategy,metric,mean,std,ci95,theory,abs_gap,runs,rounds,seed,censored,within_ci";
pub const THEORY_HEADER: &str = "alpha,beta,variant,strategy,metric,value";
pub const EXACT_HEADER: &str =
    "variant,strategy,beta,rounds,mode,expected_honest,expected_adversarial,expected_committed,growth,quality,latency";

/// Formats `v` with `digits` significant digits in plain decimal notation.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    // rounding can carry into a new leading digit, e.g. 9.9999 -> 10.000
    if s.trim_start_matches('-').split('.').next().map_or(0, str::len) as i64 > magnitude.max(0) + 1 && decimals > 0 {
        let d = decimals - 1;
        s = format!("{v:.d$}");
    }
    s
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One simulated metric, optionally joined with its closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub n: u32,
    pub f: u32,
    pub alpha: f64,
    pub variant: &'static str,
    pub strategy: &'static str,
    pub metric: &'static str,
    /// `None` when no run produced a value (e.g. nothing committed).
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub ci95: Option<f64>,
    pub theory: Option<f64>,
    pub abs_gap: Option<f64>,
    pub runs: u32,
    pub rounds: u64,
    pub seed: u64,
    /// Mean number of honest main-chain blocks left uncommitted at the horizon.
    pub censored: f64,
    /// `|mean - theory| <= ci95`.
    pub within_ci: Option<bool>,
}

impl CompareRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.f,
            self.alpha,
            self.variant,
            self.strategy,
            self.metric,
            opt(self.mean),
            opt(self.std),
            opt(self.ci95),
            opt(self.theory),
            opt(self.abs_gap),
            self.runs,
            self.rounds,
            self.seed,
            self.censored,
            opt(self.within_ci),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryRow {
    pub alpha: f64,
    pub beta: f64,
    pub variant: &'static str,
    pub strategy: &'static str,
    pub metric: &'static str,
    pub value: f64,
}

impl TheoryRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_sig(self.alpha, 12),
            fmt_sig(self.beta, 12),
            self.variant,
            self.strategy,
            self.metric,
            fmt_sig(self.value, 12)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactRow {
    pub variant: &'static str,
    pub strategy: &'static str,
    /// Exact rational text.
    pub beta: String,
    pub rounds: u64,
    pub mode: &'static str,
    pub expected_honest: f64,
    pub expected_adversarial: f64,
    pub expected_committed: f64,
    pub growth: f64,
    pub quality: Option<f64>,
    pub latency: Option<f64>,
}

impl ExactRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.variant,
            self.strategy,
            self.beta,
            self.rounds,
            self.mode,
            self.expected_honest,
            self.expected_adversarial,
            self.expected_committed,
            self.growth,
            opt(self.quality),
            opt(self.latency),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Rows {
    Compare(Vec<CompareRow>),
    Theory(Vec<TheoryRow>),
    Exact(Vec<ExactRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub name: &'static str,
    pub version: &'static str,
}

pub const ARTIFACT: Artifact = Artifact {
    name: env!("CARGO_PKG_NAME"),
    version: env!("CARGO_PKG_VERSION"),
};

/// A quoted figure next to its closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceEntry {
    pub variant: &'static str,
    pub strategy: &'static str,
    pub metric: &'static str,
    pub beta: &'static str,
    pub quoted: f64,
    pub formula: f64,
    pub relative_gap: f64,
    pub consistent: bool,
}

pub fn reference_table() -> Vec<ReferenceEntry> {
    REFERENCE_VALUES
        .iter()
        .map(|r| ReferenceEntry {
            variant: r.variant.as_str(),
            strategy: r.strategy.as_str(),
            metric: r.metric.as_str(),
            beta: "2/3",
            quoted: r.quoted,
            formula: r.formula(),
            relative_gap: r.relative_gap(),
            consistent: r.consistent(),
        })
        .collect()
}

/// Aggregate for one simulated point (simulate only).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateEntry {
    pub f: u32,
    pub variant: &'static str,
    pub strategy: &'static str,
    pub report: AggregateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub artifact: Artifact,
    pub spec: ExperimentSpec,
    pub columns: Vec<&'static str>,
    pub rows: Rows,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub aggregates: Vec<AggregateEntry>,
    pub notes: Vec<String>,
    pub reference_values: Vec<ReferenceEntry>,
}

impl Report {
    pub fn new(spec: ExperimentSpec, rows: Rows) -> Self {
        let header = match rows {
            Rows::Compare(_) => CSV_HEADER,
            Rows::Theory(_) => THEORY_HEADER,
            Rows::Exact(_) => EXACT_HEADER,
        };
        Report {
            artifact: ARTIFACT,
            spec,
            columns: header.split(',').collect(),
            rows,
            aggregates: Vec::new(),
            notes: Vec::new(),
            reference_values: reference_table(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        let lines: Vec<String> = match &self.rows {
            Rows::Compare(r) => r.iter().map(CompareRow::csv).collect(),
            Rows::Theory(r) => r.iter().map(TheoryRow::csv).collect(),
            Rows::Exact(r) => r.iter().map(ExactRow::csv).collect(),
        };
        for line in lines {
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
