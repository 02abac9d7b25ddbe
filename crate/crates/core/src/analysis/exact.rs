// SPDX-License-Identifier: Apache-2.0

//! Exhaustive finite-horizon oracle: every leader sequence of length m runs
//! through the real engine and is weighted by its probability.

use rayon::prelude::*;

use crate::adversary::AttackStrategy;
use crate::error::AnalysisError;
use crate::protocol::ProtocolVariant;
use crate::sim::{simulate_run, LeaderSequence, SimConfig};

use super::scalar::Scalar;
use super::theory::check_beta;

pub const MAX_ENUMERATION_ROUNDS: u64 = 24;

/// Integer totals over all sequences with the same number of honest leaders.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HonestBucket {
    pub sequences: u64,
    pub honest: u64,
    pub adversarial: u64,
    pub committed: u64,
    pub latency_sum: u64,
}

impl HonestBucket {
    fn add(&mut self, other: &HonestBucket) {
        self.sequences += other.sequences;
        self.honest += other.honest;
        self.adversarial += other.adversarial;
        self.committed += other.committed;
        self.latency_sum += other.latency_sum;
    }
}

/// Per-`h` integer sums; any `beta` can be plugged in afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSums {
    pub rounds: u64,
    pub variant: ProtocolVariant,
    pub strategy: AttackStrategy,
    /// Indexed by the number of honest leaders.
    pub buckets: Vec<HonestBucket>,
}

impl ExactSums {
    pub fn enumerate(variant: ProtocolVariant, strategy: AttackStrategy, rounds: u64) -> Result<Self, AnalysisError> {
        if rounds == 0 || rounds > MAX_ENUMERATION_ROUNDS {
            return Err(AnalysisError::HorizonTooLarge {
                m: rounds,
                max: MAX_ENUMERATION_ROUNDS,
            });
        }
        strategy.check_variant(variant).map_err(crate::error::SimError::from)?;
        let config = SimConfig::new(1, 0, variant, strategy);
        let m = rounds as u32;
        let total = 1u64 << m;
        let chunk = 1u64 << m.min(10);
        let empty = vec![HonestBucket::default(); m as usize + 1];
        let buckets = (0..total / chunk)
            .into_par_iter()
            .map(|c| {
                let mut local = empty.clone();
                for mask in c * chunk..(c + 1) * chunk {
                    let leaders = LeaderSequence::from_mask(mask, m);
                    let report = simulate_run(&config, &leaders)?.report;
                    let b = &mut local[mask.count_ones() as usize];
                    b.sequences += 1;
                    b.honest += report.honest_in_chain;
                    b.adversarial += report.adversarial_in_chain;
                    b.committed += report.latency_samples.len() as u64;
                    b.latency_sum += report.latency_samples.iter().sum::<u64>();
                }
                Ok::<_, AnalysisError>(local)
            })
            .try_reduce(
                || empty.clone(),
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(&b) {
                        x.add(y);
                    }
                    Ok(a)
                },
            )?;
        Ok(ExactSums {
            rounds,
            variant,
            strategy,
            buckets,
        })
    }

    pub fn expectations<S: Scalar>(&self, beta: &S) -> ExactExpectations<S> {
        let alpha = S::one() - beta.clone();
        let m = self.rounds as u32;
        let mut out = ExactExpectations {
            rounds: self.rounds,
            honest: S::zero(),
            adversarial: S::zero(),
            committed: S::zero(),
            latency_sum: S::zero(),
        };
        for (h, b) in self.buckets.iter().enumerate() {
            let w = beta.powi(h as u32) * alpha.powi(m - h as u32);
            let add = |acc: &mut S, v: u64| *acc = acc.clone() + w.clone() * S::from_u64(v);
            add(&mut out.honest, b.honest);
            add(&mut out.adversarial, b.adversarial);
            add(&mut out.committed, b.committed);
            add(&mut out.latency_sum, b.latency_sum);
        }
        out
    }
}

/// Expectations over the leader distribution at a fixed horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactExpectations<S> {
    pub rounds: u64,
    /// `E[B_h]`.
    pub honest: S,
    /// `E[B_a]`.
    pub adversarial: S,
    /// Expected number of committed honest main-chain blocks.
    pub committed: S,
    /// Expected sum of their latencies.
    pub latency_sum: S,
}

impl<S: Scalar> ExactExpectations<S> {
    pub fn growth(&self) -> S {
        self.honest.clone() / S::from_u64(self.rounds)
    }

    /// `E[B_h] / (E[B_h] + E[B_a])`.
    pub fn quality(&self) -> Option<S> {
        let total = self.honest.clone() + self.adversarial.clone();
        (!total.is_zero()).then(|| self.honest.clone() / total)
    }

    /// `E[sum D_i] / E[#committed]`, the finite-horizon analogue of u3.
    pub fn mean_latency(&self) -> Option<S> {
        (!self.committed.is_zero()).then(|| self.latency_sum.clone() / self.committed.clone())
    }

    pub fn to_f64(&self) -> ExactExpectations<f64> {
        ExactExpectations {
            rounds: self.rounds,
            honest: self.honest.to_f64(),
            adversarial: self.adversarial.to_f64(),
            committed: self.committed.to_f64(),
            latency_sum: self.latency_sum.to_f64(),
        }
    }
}

/// Enumerates all `2^m` leader sequences (m <= 24) and returns the exact
/// expectations at `beta`.
pub fn exact_finite_horizon<S: Scalar>(
    variant: ProtocolVariant,
    strategy: AttackStrategy,
    beta: &S,
    rounds: u64,
) -> Result<ExactExpectations<S>, AnalysisError> {
    check_beta(beta)?;
    Ok(ExactSums::enumerate(variant, strategy, rounds)?.expectations(beta))
}
