// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use num_rational::BigRational;
use num_traits::One;

use crate::adversary::AttackStrategy;
use crate::analysis::{theory_metric, window_oracle, ExactSums, Scalar, REFERENCE_VALUES};
use crate::error::AnalysisError;
use crate::protocol::ProtocolVariant;
use crate::sim::{aggregate, run_many, simulate_run, Metric, MetricsReport, SimConfig};

use super::report::{AggregateEntry, CompareRow, ExactRow, Report, Rows, TheoryRow};
use super::spec::{ExactMode, ExperimentSpec, OutputFormat, Subcommand};
use super::CliError;

/// Rendered report plus anything worth telling the user on stderr.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub report: Report,
    pub text: String,
    pub written_to: Option<PathBuf>,
    pub warnings: Vec<String>,
}

pub fn run_command(spec: &ExperimentSpec) -> Result<CommandOutput, CliError> {
    let mut notes = Vec::new();
    let mut aggregates = Vec::new();
    let rows = match spec.subcommand {
        Subcommand::Theory => Rows::Theory(theory_rows(spec, &mut notes)?),
        Subcommand::Exact => Rows::Exact(exact_rows(spec)?),
        Subcommand::Simulate => {
            let variant = spec.variant.expect("defaulted");
            let (rows, agg) = simulate_point(spec, variant, spec.f, false, &mut notes)?;
            aggregates.extend(agg);
            Rows::Compare(rows)
        }
        Subcommand::Compare => {
            let variant = spec.variant.expect("defaulted");
            Rows::Compare(simulate_point(spec, variant, spec.f, true, &mut notes)?.0)
        }
        Subcommand::Sweep => {
            let variant = spec.variant.expect("defaulted");
            let mut rows = Vec::new();
            for &f in &spec.f_values {
                rows.extend(simulate_point(spec, variant, f, true, &mut notes)?.0);
            }
            Rows::Compare(rows)
        }
    };
    notes.dedup();

    let mut report = Report::new(spec.clone(), rows);
    report.aggregates = aggregates;
    report.notes = notes.clone();
    let text = match spec.format {
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Json => report.to_json(),
    };
    if let Some(path) = &spec.output {
        std::fs::write(path, &text)?;
    }
    Ok(CommandOutput {
        report,
        text,
        written_to: spec.output.clone(),
        warnings: notes,
    })
}

/// Note for a quoted reference figure that disagrees with its formula.
fn reference_note(variant: ProtocolVariant, strategy: AttackStrategy, metric: Metric) -> Option<String> {
    REFERENCE_VALUES
        .iter()
        .find(|r| r.variant == variant && r.strategy == strategy && r.metric == metric && !r.consistent())
        .map(|r| {
            format!(
                "quoted {metric} {} for {variant}/{strategy} at beta = 2/3 disagrees with the closed form {} ({:.1}% gap); the closed form is used",
                r.quoted,
                super::fmt_sig(r.formula(), 12),
                100.0 * r.relative_gap()
            )
        })
}

fn theory_rows(spec: &ExperimentSpec, notes: &mut Vec<String>) -> Result<Vec<TheoryRow>, CliError> {
    let beta = spec.beta_exact();
    let alpha = BigRational::one() - beta.clone();
    let mut rows = Vec::new();
    for variant in spec.variants() {
        for strategy in spec.strategies(variant) {
            for metric in Metric::ALL {
                match theory_metric(metric, &beta, variant, strategy) {
                    Ok(v) => {
                        rows.push(TheoryRow {
                            alpha: alpha.to_f64(),
                            beta: beta.to_f64(),
                            variant: variant.as_str(),
                            strategy: strategy.as_str(),
                            metric: metric.as_str(),
                            value: v.to_f64(),
                        });
                        notes.extend(reference_note(variant, strategy, metric));
                    }
                    Err(AnalysisError::Unsupported { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    Ok(rows)
}

fn exact_rows(spec: &ExperimentSpec) -> Result<Vec<ExactRow>, CliError> {
    let variant = spec.variant.expect("defaulted");
    let strategy = spec.attack.expect("defaulted").resolve(variant);
    let beta = spec.beta_exact();
    let ex = match spec.mode {
        ExactMode::Enum => ExactSums::enumerate(variant, strategy, spec.rounds)?.expectations(&beta),
        ExactMode::Dp => window_oracle(variant, strategy, &beta, spec.rounds)?,
    };
    let f = ex.to_f64();
    Ok(vec![ExactRow {
        variant: variant.as_str(),
        strategy: strategy.as_str(),
        beta: beta.to_string(),
        rounds: spec.rounds,
        mode: spec.mode.as_str(),
        expected_honest: f.honest,
        expected_adversarial: f.adversarial,
        expected_committed: f.committed,
        growth: ex.growth().to_f64(),
        quality: ex.quality().map(|q| q.to_f64()),
        latency: ex.mean_latency().map(|l| l.to_f64()),
    }])
}

fn run_point(spec: &ExperimentSpec, config: &SimConfig) -> Result<Vec<MetricsReport>, CliError> {
    match spec.leaders()? {
        Some(leaders) => {
            config.validate()?;
            Ok(vec![simulate_run(config, &leaders)?.report])
        }
        None => Ok(run_many(config)?),
    }
}

fn simulate_point(
    spec: &ExperimentSpec,
    variant: ProtocolVariant,
    f: u32,
    with_theory: bool,
    notes: &mut Vec<String>,
) -> Result<(Vec<CompareRow>, Option<AggregateEntry>), CliError> {
    let config = spec.sim_config(variant, f);
    let strategy = config.strategy;
    let reports = run_point(spec, &config)?;
    if let Some(path) = &spec.trace {
        let first = match spec.leaders()? {
            Some(leaders) => simulate_run(&config, &leaders)?,
            None => crate::sim::simulate_seeded(&config)?,
        };
        std::fs::write(path, first.trace_csv())?;
    }
    let agg = aggregate(&reports).expect("at least one run");
    let beta = spec.beta_for_f(f);

    let mut rows = Vec::new();
    for metric in Metric::ALL {
        let summary = agg.metric(metric);
        let theory = if with_theory {
            match theory_metric(metric, &beta, variant, strategy) {
                Ok(v) => {
                    notes.extend(reference_note(variant, strategy, metric));
                    Some(v.to_f64())
                }
                Err(AnalysisError::Unsupported { .. }) => {
                    notes.push(format!("no closed form for {metric} under {variant}/{strategy}; theory column left empty"));
                    None
                }
                Err(e) => return Err(e.into()),
            }
        } else {
            None
        };
        let mean = summary.map(|s| s.mean);
        let abs_gap = mean.zip(theory).map(|(m, t)| (m - t).abs());
        rows.push(CompareRow {
            n: spec.n,
            f,
            alpha: config.alpha(),
            variant: variant.as_str(),
            strategy: strategy.as_str(),
            metric: metric.as_str(),
            mean,
            std: summary.and_then(|s| s.std),
            ci95: summary.and_then(|s| s.ci95),
            theory,
            abs_gap,
            runs: reports.len() as u32,
            rounds: config.rounds,
            seed: config.seed,
            censored: agg.censored_mean,
            within_ci: abs_gap.zip(summary.and_then(|s| s.ci95)).map(|(g, ci)| g <= ci),
        });
    }
    let entry = AggregateEntry {
        f,
        variant: variant.as_str(),
        strategy: strategy.as_str(),
        report: agg,
    };
    Ok((rows, Some(entry)))
}
