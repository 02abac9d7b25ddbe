// SPDX-License-Identifier: Apache-2.0

//! State-class Markov chains of the delay attacks, their hitting times and
//! the case-by-case latency composition built on top of them.

use crate::adversary::AttackStrategy;
use crate::error::AnalysisError;
use crate::protocol::ProtocolVariant;
use crate::sim::Metric;

use super::linalg::{mat_vec, solve, vec_mat, Matrix};
use super::scalar::Scalar;
use super::theory::check_beta;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel<S> {
    pub variant: ProtocolVariant,
    /// Row-stochastic; row `i` is the law of the next state from S_i.
    pub transition: Matrix<S>,
    pub stationary: Vec<S>,
}

impl<S: Scalar> MarkovModel<S> {
    pub fn states(&self) -> usize {
        self.transition.len()
    }

    /// `pi T - pi`, zero for a stationary vector.
    pub fn stationarity_residual(&self) -> Vec<S> {
        vec_mat(&self.stationary, &self.transition)
            .into_iter()
            .zip(&self.stationary)
            .map(|(a, b)| a - b.clone())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<S> {
        self.transition
            .iter()
            .map(|row| row.iter().fold(S::zero(), |acc, x| acc + x.clone()))
            .collect()
    }
}

fn delay_variant(variant: ProtocolVariant, strategy: AttackStrategy, metric: Metric) -> Result<(), AnalysisError> {
    if strategy.is_delay() && strategy.check_variant(variant).is_ok() {
        Ok(())
    } else {
        Err(AnalysisError::Unsupported {
            metric: metric.as_str(),
            variant: variant.as_str(),
            strategy: strategy.as_str(),
        })
    }
}

/// Number of state classes the variant distinguishes.
fn state_count(variant: ProtocolVariant) -> usize {
    match variant {
        ProtocolVariant::HotStuffBroadcastQc => 3,
        _ => 4,
    }
}

/// Transition matrix of the delay attack on `variant`.
pub fn transition_matrix<S: Scalar>(variant: ProtocolVariant, beta: &S) -> Matrix<S> {
    let k = state_count(variant);
    let alpha = S::one() - beta.clone();
    let mut t = vec![vec![S::zero(); k]; k];
    for (i, row) in t.iter_mut().enumerate() {
        let back = if variant == ProtocolVariant::HotStuffPipelined && i == 3 { 1 } else { 0 };
        row[back] = row[back].clone() + alpha.clone();
        let next = (i + 1).min(k - 1);
        row[next] = row[next].clone() + beta.clone();
    }
    t
}

/// Transition law of the rounds that do not produce the commit evidence: the
/// last state's honest self-loop is where the 3-direct chain (plus extension)
/// completes.
fn non_hitting_matrix<S: Scalar>(variant: ProtocolVariant, beta: &S) -> Matrix<S> {
    let mut q = transition_matrix(variant, beta);
    let last = q.len() - 1;
    q[last][last] = q[last][last].clone() - beta.clone();
    q
}

/// Builds the chain and solves `pi T = pi`, `sum pi = 1`.
pub fn markov_model<S: Scalar>(variant: ProtocolVariant, strategy: AttackStrategy, beta: &S) -> Result<MarkovModel<S>, AnalysisError> {
    delay_variant(variant, strategy, Metric::Latency)?;
    check_beta(beta)?;
    let transition = transition_matrix(variant, beta);
    let k = transition.len();
    // (T^t - I) pi = 0 with the last equation replaced by normalization
    let mut a = vec![vec![S::zero(); k]; k];
    for (i, row) in a.iter_mut().enumerate().take(k - 1) {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = transition[j][i].clone();
            if i == j {
                *cell = cell.clone() - S::one();
            }
        }
    }
    a[k - 1] = vec![S::one(); k];
    let mut rhs = vec![S::zero(); k];
    rhs[k - 1] = S::one();
    let stationary = solve(a, rhs)?;
    Ok(MarkovModel {
        variant,
        transition,
        stationary,
    })
}

/// Stationary vector from the printed closed forms.
pub fn stationary_closed_form<S: Scalar>(variant: ProtocolVariant, beta: &S) -> Vec<S> {
    let b = |k: u32| beta.powi(k);
    let alpha = S::one() - beta.clone();
    match variant {
        ProtocolVariant::HotStuffPipelined => {
            let den = b(3) - b(2) + S::one();
            vec![
                (S::one() + b(1)) * alpha.clone() * alpha.clone() / den.clone(),
                b(1) * alpha.clone() / den.clone(),
                b(2) * alpha / den.clone(),
                b(3) / den,
            ]
        }
        ProtocolVariant::LibraBft => vec![alpha.clone(), b(1) * alpha.clone(), b(2) * alpha, b(3)],
        ProtocolVariant::HotStuffBroadcastQc => vec![alpha.clone(), alpha * b(1), b(2)],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimes<S> {
    pub variant: ProtocolVariant,
    /// `E[X_i]` for each start state.
    pub expected: Vec<S>,
}

impl<S: Scalar> HittingTimes<S> {
    /// `E - (Q E + 1)` for the defining system.
    pub fn residual(&self, beta: &S) -> Vec<S> {
        let q = non_hitting_matrix(self.variant, beta);
        mat_vec(&q, &self.expected)
            .into_iter()
            .zip(&self.expected)
            .map(|(qe, e)| e.clone() - qe - S::one())
            .collect()
    }
}

/// Expected rounds until the commit evidence appears, from each state.
pub fn hitting_times<S: Scalar>(variant: ProtocolVariant, strategy: AttackStrategy, beta: &S) -> Result<HittingTimes<S>, AnalysisError> {
    delay_variant(variant, strategy, Metric::Latency)?;
    if beta.is_zero() {
        return Err(AnalysisError::Divergent);
    }
    check_beta(beta)?;
    let q = non_hitting_matrix(variant, beta);
    let k = q.len();
    let a: Matrix<S> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let id = if i == j { S::one() } else { S::zero() };
                    id - q[i][j].clone()
                })
                .collect()
        })
        .collect();
    let expected = solve(a, vec![S::one(); k])?;
    Ok(HittingTimes { variant, expected })
}

/// Hitting times from the printed closed forms.
pub fn hitting_times_closed_form<S: Scalar>(variant: ProtocolVariant, beta: &S) -> Result<Vec<S>, AnalysisError> {
    if beta.is_zero() {
        return Err(AnalysisError::Divergent);
    }
    let b = |k: u32| beta.powi(k);
    let one = S::one;
    let two = S::from_ratio(2, 1);
    Ok(match variant {
        ProtocolVariant::HotStuffPipelined => {
            let d = b(4);
            vec![
                (two * b(3) + b(1) + one()) / d.clone(),
                (b(3) + b(1) + one()) / d.clone(),
                // the system gives this, not (1 + b)(b^2 - b + 1) / b^4
                (b(3) - b(2) + b(1) + one()) / d.clone(),
                (b(3) - b(2) + one()) / d,
            ]
        }
        ProtocolVariant::LibraBft => {
            let d = b(4);
            vec![
                (b(3) + b(2) + b(1) + one()) / d.clone(),
                (b(2) + b(1) + one()) / d.clone(),
                (b(1) + one()) / d.clone(),
                one() / d,
            ]
        }
        ProtocolVariant::HotStuffBroadcastQc => {
            let d = b(3);
            vec![(b(2) + b(1) + one()) / d.clone(), (b(1) + one()) / d.clone(), one() / d]
        }
    })
}

/// Kept-block-weighted average of the per-case commit delays.
///
/// An honest block proposed from S0 is always kept and waits `E[X1]`; under
/// LibraBFT the same holds from S1. A HotStuff block proposed from S1 then
/// meets an adversarial round (delay `E[X0] + 1`), an honest then adversarial
/// pair (`E[X1] + 2`) or two honest rounds (`E[X3] + 2`). From S2 or S3 the
/// block survives only if the next leader is honest, after which it splits
/// like the last two cases (LibraBFT: `E[X0] + 2` for the middle one).
pub fn latency_by_composition<S: Scalar>(variant: ProtocolVariant, beta: &S) -> Result<S, AnalysisError> {
    let strategy = AttackStrategy::delay_for(variant);
    let pi = markov_model(variant, strategy, beta)?.stationary;
    let e = hitting_times(variant, strategy, beta)?.expected;
    let alpha = S::one() - beta.clone();
    let two = S::from_ratio(2, 1);
    match variant {
        ProtocolVariant::HotStuffBroadcastQc => Ok(e[1].clone()),
        ProtocolVariant::HotStuffPipelined => {
            let tail = alpha.clone() * beta.clone() * (e[1].clone() + two.clone()) + beta.powi(2) * (e[3].clone() + two);
            let from_s1 = alpha * (e[0].clone() + S::one()) + tail.clone();
            let high = pi[2].clone() + pi[3].clone();
            let num = pi[0].clone() * e[1].clone() + pi[1].clone() * from_s1 + high.clone() * tail;
            let den = pi[0].clone() + pi[1].clone() + high * beta.clone();
            Ok(num / den)
        }
        ProtocolVariant::LibraBft => {
            let tail = alpha * beta.clone() * (e[0].clone() + two.clone()) + beta.powi(2) * (e[3].clone() + two);
            let low = pi[0].clone() + pi[1].clone();
            let high = pi[2].clone() + pi[3].clone();
            let num = low.clone() * e[1].clone() + high.clone() * tail;
            let den = low + high * beta.clone();
            Ok(num / den)
        }
    }
}
