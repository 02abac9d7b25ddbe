// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::block::{BlockId, ProposerKind, Round};
use crate::protocol::ReplicaView;
use crate::tree::BlockTree;

/// Per-run measurements over a frozen main chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rounds: u64,
    pub honest_in_chain: u64,
    pub adversarial_in_chain: u64,
    pub nil_in_chain: u64,
    /// Blocks in the tree but off the main chain, withheld ones included.
    pub orphaned: u64,
    /// Rounds that added no block at all.
    pub timeouts: u64,
    /// Honest main-chain blocks still uncommitted at the horizon.
    pub censored: u64,
    pub growth: f64,
    pub quality: Option<f64>,
    pub latency: Option<f64>,
    #[serde(skip)]
    pub latency_samples: Vec<u64>,
    /// Rounds that started in S0, S1, S2, S3.
    pub occupancy: [u64; 4],
}

impl MetricsReport {
    pub(crate) fn measure(
        tree: &BlockTree,
        view: &ReplicaView,
        main_chain: &[BlockId],
        rounds: u64,
        timeouts: u64,
        occupancy: [u64; 4],
    ) -> Self {
        let mut commit_round: Vec<Option<Round>> = vec![None; tree.len()];
        for &(id, r) in view.commit_log() {
            commit_round[id.0 as usize] = Some(r);
        }
        let (mut bh, mut ba, mut nil, mut censored) = (0, 0, 0, 0);
        let mut samples = Vec::new();
        for &id in main_chain {
            let block = tree.block(id);
            match block.proposer {
                ProposerKind::Honest => {
                    bh += 1;
                    match commit_round[id.0 as usize] {
                        Some(c) => samples.push(c.since(block.round)),
                        None => censored += 1,
                    }
                }
                ProposerKind::Adversarial => ba += 1,
                ProposerKind::Nil => nil += 1,
                ProposerKind::Genesis => {}
            }
        }
        samples.reverse();
        let orphaned = (tree.len() - main_chain.len()) as u64;
        let latency = (!samples.is_empty()).then(|| samples.iter().sum::<u64>() as f64 / samples.len() as f64);
        MetricsReport {
            rounds,
            honest_in_chain: bh,
            adversarial_in_chain: ba,
            nil_in_chain: nil,
            orphaned,
            timeouts,
            censored,
            growth: if rounds == 0 { 0.0 } else { bh as f64 / rounds as f64 },
            quality: (bh + ba > 0).then(|| bh as f64 / (bh + ba) as f64),
            latency,
            latency_samples: samples,
            occupancy,
        }
    }

    /// Every round is accounted for exactly once.
    pub fn conserves_rounds(&self) -> bool {
        self.honest_in_chain + self.adversarial_in_chain + self.nil_in_chain + self.orphaned + self.timeouts
            == self.rounds
    }

    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Growth => Some(self.growth),
            Metric::Quality => self.quality,
            Metric::Latency => self.latency,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Growth,
    Quality,
    Latency,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Growth, Metric::Quality, Metric::Latency];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Growth => "growth",
            Metric::Quality => "quality",
            Metric::Latency => "latency",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation; `None` with fewer than two values.
    pub std: Option<f64>,
    /// Normal-approximation 95% half-width, 1.96 s / sqrt(k).
    pub ci95: Option<f64>,
    /// Number of runs that produced a value.
    pub samples: usize,
}

impl MetricSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let k = values.len();
        if k == 0 {
            return None;
        }
        // identical values give exactly zero spread
        let mean = if values.iter().all(|&v| v == values[0]) {
            values[0]
        } else {
            values.iter().sum::<f64>() / k as f64
        };
        let (std, ci95) = if k >= 2 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            let s = var.sqrt();
            (Some(s), Some(1.96 * s / (k as f64).sqrt()))
        } else {
            (None, None)
        };
        Some(MetricSummary {
            mean,
            std,
            ci95,
            samples: k,
        })
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> Option<f64> {
        self.std.map(|s| s / (self.samples as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub runs: usize,
    pub growth: MetricSummary,
    pub quality: Option<MetricSummary>,
    pub latency: Option<MetricSummary>,
    pub honest_in_chain: MetricSummary,
    pub adversarial_in_chain: MetricSummary,
    pub censored_mean: f64,
    /// Fraction of all rounds that started in each state class.
    pub occupancy: [f64; 4],
}

impl AggregateReport {
    pub fn metric(&self, metric: Metric) -> Option<&MetricSummary> {
        match metric {
            Metric::Growth => Some(&self.growth),
            Metric::Quality => self.quality.as_ref(),
            Metric::Latency => self.latency.as_ref(),
        }
    }
}

/// Mean, sample std and 95% CI per metric. `None` for an empty list.
pub fn aggregate(reports: &[MetricsReport]) -> Option<AggregateReport> {
    if reports.is_empty() {
        return None;
    }
    let collect = |f: &dyn Fn(&MetricsReport) -> Option<f64>| -> Vec<f64> { reports.iter().filter_map(f).collect() };
    let growth = MetricSummary::from_values(&collect(&|r| Some(r.growth)))?;
    let quality = MetricSummary::from_values(&collect(&|r| r.quality));
    let latency = MetricSummary::from_values(&collect(&|r| r.latency));
    let bh = MetricSummary::from_values(&collect(&|r| Some(r.honest_in_chain as f64)))?;
    let ba = MetricSummary::from_values(&collect(&|r| Some(r.adversarial_in_chain as f64)))?;
    let total_rounds: u64 = reports.iter().map(|r| r.rounds).sum();
    let mut occupancy = [0.0; 4];
    for (i, slot) in occupancy.iter_mut().enumerate() {
        let hits: u64 = reports.iter().map(|r| r.occupancy[i]).sum();
        *slot = if total_rounds == 0 { 0.0 } else { hits as f64 / total_rounds as f64 };
    }
    Some(AggregateReport {
        runs: reports.len(),
        growth,
        quality,
        latency,
        honest_in_chain: bh,
        adversarial_in_chain: ba,
        censored_mean: reports.iter().map(|r| r.censored as f64).sum::<f64>() / reports.len() as f64,
        occupancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(growth: f64) -> MetricsReport {
        MetricsReport {
            rounds: 10,
            honest_in_chain: (growth * 10.0) as u64,
            adversarial_in_chain: 0,
            nil_in_chain: 0,
            orphaned: 0,
            timeouts: 0,
            censored: 0,
            growth,
            quality: Some(1.0),
            latency: Some(3.0),
            latency_samples: vec![3],
            occupancy: [0, 10, 0, 0],
        }
    }

    #[test]
    fn single_report_has_no_ci() {
        let agg = aggregate(&[report(0.5)]).unwrap();
        assert_eq!(agg.growth.mean, 0.5);
        assert_eq!(agg.growth.std, None);
        assert_eq!(agg.growth.ci95, None);
    }

    #[test]
    fn identical_reports_have_zero_std() {
        let agg = aggregate(&vec![report(0.7); 10]).unwrap();
        assert_eq!(agg.growth.std, Some(0.0));
        assert_eq!(agg.latency.unwrap().ci95, Some(0.0));
        assert_eq!(agg.occupancy, [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_is_none() {
        assert!(aggregate(&[]).is_none());
    }

    #[test]
    fn sample_std() {
        let s = MetricSummary::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((s.std.unwrap() - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.ci95.unwrap() - 1.96 * (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }
}
