// SPDX-License-Identifier: Apache-2.0

//! Closed-form limits for chain growth, chain quality and latency.

use crate::adversary::AttackStrategy;
use crate::error::AnalysisError;
use crate::protocol::ProtocolVariant;
use crate::sim::Metric;

use super::scalar::Scalar;

/// Quoted figures for α = 1/3 alongside their closed forms. A quote that
/// strays from its formula by more than 1% is flagged in reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceValue {
    pub variant: ProtocolVariant,
    pub strategy: AttackStrategy,
    pub metric: Metric,
    pub quoted: f64,
    pub formula_num: i64,
    pub formula_den: i64,
}

impl ReferenceValue {
    pub fn formula(&self) -> f64 {
        self.formula_num as f64 / self.formula_den as f64
    }

    pub fn relative_gap(&self) -> f64 {
        (self.quoted - self.formula()).abs() / self.formula()
    }

    pub fn consistent(&self) -> bool {
        self.relative_gap() <= 0.01
    }
}

/// Published figures at β = 2/3.
pub const REFERENCE_VALUES: [ReferenceValue; 6] = [
    ReferenceValue {
        variant: ProtocolVariant::HotStuffPipelined,
        strategy: AttackStrategy::Forking,
        metric: Metric::Growth,
        quoted: 8.0 / 27.0,
        formula_num: 8,
        formula_den: 27,
    },
    ReferenceValue {
        variant: ProtocolVariant::HotStuffPipelined,
        strategy: AttackStrategy::Forking,
        metric: Metric::Quality,
        quoted: 8.0 / 17.0,
        formula_num: 8,
        formula_den: 17,
    },
    ReferenceValue {
        variant: ProtocolVariant::HotStuffPipelined,
        strategy: AttackStrategy::DelayHotStuff,
        metric: Metric::Latency,
        quoted: 8.33,
        formula_num: 2765,
        formula_den: 304,
    },
    ReferenceValue {
        variant: ProtocolVariant::LibraBft,
        strategy: AttackStrategy::DelayLibra,
        metric: Metric::Latency,
        quoted: 10.25,
        formula_num: 3773,
        formula_den: 368,
    },
    ReferenceValue {
        variant: ProtocolVariant::HotStuffBroadcastQc,
        strategy: AttackStrategy::DelayBroadcastQc,
        metric: Metric::Latency,
        quoted: 5.63,
        formula_num: 45,
        formula_den: 8,
    },
    ReferenceValue {
        variant: ProtocolVariant::HotStuffBroadcastQc,
        strategy: AttackStrategy::Forking,
        metric: Metric::Growth,
        quoted: 4.0 / 9.0,
        formula_num: 4,
        formula_den: 9,
    },
];

pub(crate) fn check_beta<S: Scalar>(beta: &S) -> Result<(), AnalysisError> {
    if *beta > S::zero() && *beta <= S::one() {
        Ok(())
    } else {
        Err(AnalysisError::BetaOutOfRange(format!("{beta:?}")))
    }
}

fn unsupported(metric: Metric, variant: ProtocolVariant, strategy: AttackStrategy) -> AnalysisError {
    AnalysisError::Unsupported {
        metric: metric.as_str(),
        variant: variant.as_str(),
        strategy: strategy.as_str(),
    }
}

/// Honest blocks per round in the main chain.
pub fn theory_growth<S: Scalar>(beta: &S, variant: ProtocolVariant, strategy: AttackStrategy) -> Result<S, AnalysisError> {
    check_beta(beta)?;
    match (strategy, variant) {
        (AttackStrategy::None, _) => Ok(beta.clone()),
        (AttackStrategy::Forking, ProtocolVariant::HotStuffBroadcastQc) => Ok(beta.powi(2)),
        (AttackStrategy::Forking, _) => Ok(beta.powi(3)),
        _ => Err(unsupported(Metric::Growth, variant, strategy)),
    }
}

/// Honest fraction of main-chain blocks.
pub fn theory_quality<S: Scalar>(beta: &S, variant: ProtocolVariant, strategy: AttackStrategy) -> Result<S, AnalysisError> {
    check_beta(beta)?;
    let b = beta.clone();
    match (strategy, variant) {
        (AttackStrategy::None, _) => Ok(b),
        (AttackStrategy::Forking, ProtocolVariant::HotStuffBroadcastQc) => {
            let b2 = b.powi(2);
            Ok(b2.clone() / (b2 - b + S::one()))
        }
        (AttackStrategy::Forking, _) => {
            let b3 = b.powi(3);
            Ok(b3.clone() / (b3 - b + S::one()))
        }
        _ => Err(unsupported(Metric::Quality, variant, strategy)),
    }
}

/// Mean rounds from proposal to commit for honest main-chain blocks.
pub fn theory_latency<S: Scalar>(beta: &S, variant: ProtocolVariant, strategy: AttackStrategy) -> Result<S, AnalysisError> {
    check_beta(beta)?;
    let b = |k: u32| beta.powi(k);
    let int = |v: i64| S::from_ratio(v, 1);
    match (strategy, variant) {
        (AttackStrategy::None, v) => Ok(int(v.base_latency() as i64)),
        (AttackStrategy::DelayHotStuff, ProtocolVariant::HotStuffPipelined) => {
            let num = b(7) + int(3) * b(6) - int(4) * b(5) + int(2) * b(4) + b(3) - int(2) * b(2) + b(1) + S::one();
            let den = int(2) * b(7) - int(2) * b(6) + b(4);
            Ok(num / den)
        }
        (AttackStrategy::DelayLibra, ProtocolVariant::LibraBft) => {
            let num = b(7) + b(1) + S::one();
            let den = b(7) - b(6) + b(4);
            Ok(num / den)
        }
        (AttackStrategy::DelayBroadcastQc, ProtocolVariant::HotStuffBroadcastQc) => Ok((b(1) + S::one()) / b(3)),
        _ => Err(unsupported(Metric::Latency, variant, strategy)),
    }
}

pub fn theory_metric<S: Scalar>(
    metric: Metric,
    beta: &S,
    variant: ProtocolVariant,
    strategy: AttackStrategy,
) -> Result<S, AnalysisError> {
    match metric {
        Metric::Growth => theory_growth(beta, variant, strategy),
        Metric::Quality => theory_quality(beta, variant, strategy),
        Metric::Latency => theory_latency(beta, variant, strategy),
    }
}
