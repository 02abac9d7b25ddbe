// SPDX-License-Identifier: Apache-2.0

//! Seeded round-loop Monte Carlo engine.

mod config;
mod engine;
mod leaders;
mod metrics;

pub use config::SimConfig;
pub use engine::{simulate_run, simulate_seeded, RoundRecord, RunResult, TraceAction};
pub use leaders::LeaderSequence;
pub use metrics::{aggregate, AggregateReport, Metric, MetricSummary, MetricsReport};

use rayon::prelude::*;

use crate::error::SimError;

/// Runs `config.runs` independent simulations in parallel. Run `i` draws its
/// leaders from seed `config.seed + i`; results come back in run order.
pub fn run_many(config: &SimConfig) -> Result<Vec<MetricsReport>, SimError> {
    config.validate()?;
    (0..config.runs)
        .into_par_iter()
        .map(|i| {
            let leaders = LeaderSequence::generate(config.run_seed(i), config.rounds, config.alpha());
            simulate_run(config, &leaders).map(|r| r.report)
        })
        .collect()
}
