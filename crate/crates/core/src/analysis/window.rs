// SPDX-License-Identifier: Apache-2.0

//! Forward dynamic program over a sliding window of the main chain.
//!
//! The discrete state keeps the last [`WINDOW_DEPTH`] main-chain blocks
//! (proposer kind, committed and published flags, whether each block sits one
//! round above its parent), a pointer to the locked block, whether the tip was
//! proposed in the previous round and whether that round timed out. Absolute
//! rounds never enter the key. Everything round-valued is carried as linear
//! accumulators `E[X · 1{state}]`, so merging equal keys is plain addition.
//!
//! This is a separate implementation of the replica and adversary rules, not
//! a wrapper around the tree engine; the enumeration oracle is its ground
//! truth. It assumes orphaned blocks never come back into play, which holds
//! for every strategy in this crate, and reports an error if the lock or a
//! fork target ever falls out of the window.

use std::collections::BTreeMap;

use crate::adversary::AttackStrategy;
use crate::error::AnalysisError;
use crate::protocol::ProtocolVariant;

use super::exact::ExactExpectations;
use super::scalar::Scalar;
use super::theory::check_beta;

/// Main-chain blocks kept in the discrete state.
pub const WINDOW_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Kind {
    Genesis,
    Honest,
    Adversarial,
    Nil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Slot {
    kind: Kind,
    committed: bool,
    /// QC visible to everyone; false only for a LibraBFT block whose QC is
    /// still with the next leader.
    published: bool,
    /// Round is exactly one above the parent's.
    consecutive: bool,
}

const EMPTY: Slot = Slot {
    kind: Kind::Genesis,
    committed: true,
    published: true,
    consecutive: false,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Shape {
    slots: [Slot; WINDOW_DEPTH + 1],
    len: usize,
    lock: usize,
    /// The tip was proposed in the previous round.
    tip_fresh: bool,
    last_timeout: bool,
}

#[derive(Debug, Clone)]
struct Acc<S> {
    prob: S,
    /// `E[round of slot i · 1]`.
    slot_round: Vec<S>,
    /// Uncommitted honest blocks that left the window: count and round sum.
    old_count: S,
    old_round_sum: S,
    settled_honest: S,
    settled_adversarial: S,
    committed: S,
    latency_sum: S,
}

impl<S: Scalar> Acc<S> {
    fn scaled(&self, w: &S) -> Self {
        let m = |x: &S| x.clone() * w.clone();
        Acc {
            prob: m(&self.prob),
            slot_round: self.slot_round.iter().map(m).collect(),
            old_count: m(&self.old_count),
            old_round_sum: m(&self.old_round_sum),
            settled_honest: m(&self.settled_honest),
            settled_adversarial: m(&self.settled_adversarial),
            committed: m(&self.committed),
            latency_sum: m(&self.latency_sum),
        }
    }

    fn merge(&mut self, other: Acc<S>) {
        let add = |a: &mut S, b: S| *a = a.clone() + b;
        add(&mut self.prob, other.prob);
        for (a, b) in self.slot_round.iter_mut().zip(other.slot_round) {
            add(a, b);
        }
        add(&mut self.old_count, other.old_count);
        add(&mut self.old_round_sum, other.old_round_sum);
        add(&mut self.settled_honest, other.settled_honest);
        add(&mut self.settled_adversarial, other.settled_adversarial);
        add(&mut self.committed, other.committed);
        add(&mut self.latency_sum, other.latency_sum);
    }
}

enum Move {
    Extend(usize, Kind),
    Nothing,
    VoteSplit,
}

struct Machine {
    variant: ProtocolVariant,
    strategy: AttackStrategy,
}

fn window_err(msg: &str) -> AnalysisError {
    AnalysisError::Window(msg.to_string())
}

impl Machine {
    fn libra(&self) -> bool {
        self.variant == ProtocolVariant::LibraBft
    }

    fn state_class(&self, s: &Shape) -> Result<usize, AnalysisError> {
        if s.last_timeout {
            return Ok(0);
        }
        let mut i = s.len - 1;
        let mut len = 0;
        loop {
            if s.slots[i].committed {
                break;
            }
            len += 1;
            if len >= 3 || !s.slots[i].consecutive {
                break;
            }
            if i == 0 {
                return Err(window_err("state class needs a block below the window"));
            }
            i -= 1;
        }
        Ok(len.max(1))
    }

    fn releases(&self, honest: bool, pending: Kind, class: usize) -> bool {
        if honest {
            return true;
        }
        match self.strategy {
            AttackStrategy::Forking => pending == Kind::Adversarial,
            AttackStrategy::DelayLibra => class != 3,
            _ => true,
        }
    }

    fn choose(&self, s: &Shape, honest: bool, class: usize) -> Move {
        let tip = s.len - 1;
        if honest {
            return Move::Extend(tip, Kind::Honest);
        }
        match self.strategy {
            AttackStrategy::None => Move::Extend(tip, Kind::Adversarial),
            AttackStrategy::Silent | AttackStrategy::DelayBroadcastQc => Move::Nothing,
            AttackStrategy::Forking => {
                let target = (s.lock..s.len)
                    .rev()
                    .find(|&i| s.slots[i].kind == Kind::Adversarial && s.slots[i].published)
                    .unwrap_or(s.lock);
                Move::Extend(target, Kind::Adversarial)
            }
            AttackStrategy::DelayHotStuff if class == 3 && tip > 0 => Move::Extend(tip - 1, Kind::Adversarial),
            AttackStrategy::DelayHotStuff => Move::Nothing,
            AttackStrategy::DelayLibra => Move::VoteSplit,
        }
    }

    /// One round from `(shape, acc)` under a leader of the given kind.
    fn step<S: Scalar>(&self, mut s: Shape, mut acc: Acc<S>, honest: bool, round: u64) -> Result<(Shape, Acc<S>), AnalysisError> {
        let class = self.state_class(&s)?;
        let tip = s.len - 1;
        if !s.slots[tip].published {
            if self.releases(honest, s.slots[tip].kind, class) {
                s.slots[tip].published = true;
            } else {
                // withheld QC: the block is gone for good
                if s.lock >= tip {
                    return Err(window_err("lock points at a withheld block"));
                }
                s.len -= 1;
                acc.slot_round.pop();
                s.tip_fresh = false;
            }
        }

        let mv = self.choose(&s, honest, class);
        let appended = match mv {
            Move::Extend(target, kind) => {
                if target < s.lock {
                    return Err(window_err("proposal below the lock"));
                }
                let consecutive = target == s.len - 1 && s.tip_fresh;
                s.len = target + 1;
                acc.slot_round.truncate(s.len);
                self.append(&mut s, &mut acc, kind, consecutive, round);
                Some(kind)
            }
            Move::Nothing if self.libra() => {
                let consecutive = s.tip_fresh;
                self.append(&mut s, &mut acc, Kind::Nil, consecutive, round);
                Some(Kind::Nil)
            }
            Move::Nothing | Move::VoteSplit => None,
        };

        match appended {
            Some(kind) => {
                let t = s.len - 1;
                // vote: lock the grandparent
                if t >= 2 {
                    s.lock = s.lock.max(t - 2);
                }
                s.tip_fresh = true;
                s.last_timeout = false;
                match self.variant {
                    ProtocolVariant::HotStuffBroadcastQc => {
                        s.lock = s.lock.max(t - 1);
                        if t >= 2 && s.slots[t].consecutive && s.slots[t - 1].consecutive {
                            self.commit(&mut s, &mut acc, t - 2, round);
                        }
                    }
                    _ => {
                        if kind != Kind::Nil && t >= 3 && s.slots[t - 1].consecutive && s.slots[t - 2].consecutive {
                            self.commit(&mut s, &mut acc, t - 3, round);
                        }
                    }
                }
            }
            None => {
                s.tip_fresh = false;
                s.last_timeout = true;
            }
        }

        // committed blocks under the lock can never matter again, except the
        // newest of them, which stops the backward walks
        let mut drop = 0;
        while drop < s.lock && s.slots[drop].committed && s.slots[drop + 1].committed {
            drop += 1;
        }
        if s.len - drop > WINDOW_DEPTH {
            drop = s.len - WINDOW_DEPTH;
            if drop > s.lock {
                return Err(window_err("lock fell out of the window"));
            }
        }
        for old in 0..drop {
            let slot = s.slots[old];
            match slot.kind {
                Kind::Honest => {
                    acc.settled_honest = acc.settled_honest.clone() + acc.prob.clone();
                    if !slot.committed {
                        acc.old_count = acc.old_count.clone() + acc.prob.clone();
                        acc.old_round_sum = acc.old_round_sum.clone() + acc.slot_round[old].clone();
                    }
                }
                Kind::Adversarial => acc.settled_adversarial = acc.settled_adversarial.clone() + acc.prob.clone(),
                Kind::Nil | Kind::Genesis => {}
            }
        }
        if drop > 0 {
            acc.slot_round.drain(..drop);
            s.slots.copy_within(drop..s.len, 0);
            s.len -= drop;
            s.lock -= drop;
        }
        for slot in &mut s.slots[s.len..] {
            *slot = EMPTY;
        }
        Ok((s, acc))
    }

    fn append<S: Scalar>(&self, s: &mut Shape, acc: &mut Acc<S>, kind: Kind, consecutive: bool, round: u64) {
        s.slots[s.len] = Slot {
            kind,
            committed: false,
            published: !(self.libra() && kind != Kind::Nil),
            consecutive,
        };
        s.len += 1;
        acc.slot_round.push(acc.prob.clone() * S::from_u64(round));
    }

    /// Commits slot `head` and every uncommitted block below it.
    fn commit<S: Scalar>(&self, s: &mut Shape, acc: &mut Acc<S>, head: usize, round: u64) {
        let r = S::from_u64(round);
        let mut i = head as isize;
        while i >= 0 && !s.slots[i as usize].committed {
            let idx = i as usize;
            s.slots[idx].committed = true;
            if s.slots[idx].kind == Kind::Honest {
                acc.committed = acc.committed.clone() + acc.prob.clone();
                acc.latency_sum = acc.latency_sum.clone() + acc.prob.clone() * r.clone() - acc.slot_round[idx].clone();
            }
            i -= 1;
        }
        if i < 0 {
            acc.committed = acc.committed.clone() + acc.old_count.clone();
            acc.latency_sum = acc.latency_sum.clone() + acc.old_count.clone() * r - acc.old_round_sum.clone();
            acc.old_count = S::zero();
            acc.old_round_sum = S::zero();
        }
    }
}

/// Exact expectations at horizon `rounds` computed by the window DP.
pub fn window_oracle<S: Scalar>(
    variant: ProtocolVariant,
    strategy: AttackStrategy,
    beta: &S,
    rounds: u64,
) -> Result<ExactExpectations<S>, AnalysisError> {
    check_beta(beta)?;
    strategy
        .check_variant(variant)
        .map_err(crate::error::SimError::from)?;
    let machine = Machine { variant, strategy };
    let alpha = S::one() - beta.clone();

    let mut slots = [EMPTY; WINDOW_DEPTH + 1];
    slots[0] = EMPTY;
    let start = Shape {
        slots,
        len: 1,
        lock: 0,
        tip_fresh: true,
        last_timeout: false,
    };
    let zero = S::zero;
    let mut states: BTreeMap<Shape, Acc<S>> = BTreeMap::new();
    states.insert(
        start,
        Acc {
            prob: S::one(),
            slot_round: vec![zero()],
            old_count: zero(),
            old_round_sum: zero(),
            settled_honest: zero(),
            settled_adversarial: zero(),
            committed: zero(),
            latency_sum: zero(),
        },
    );

    for round in 1..=rounds {
        let mut next: BTreeMap<Shape, Acc<S>> = BTreeMap::new();
        for (shape, acc) in &states {
            for (honest, w) in [(true, beta), (false, &alpha)] {
                if w.is_zero() {
                    continue;
                }
                let (s, a) = machine.step(*shape, acc.scaled(w), honest, round)?;
                match next.get_mut(&s) {
                    Some(existing) => existing.merge(a),
                    None => {
                        next.insert(s, a);
                    }
                }
            }
        }
        states = next;
    }

    let mut out = ExactExpectations {
        rounds,
        honest: zero(),
        adversarial: zero(),
        committed: zero(),
        latency_sum: zero(),
    };
    for (shape, acc) in states {
        let mut h = acc.settled_honest;
        let mut a = acc.settled_adversarial;
        for slot in &shape.slots[..shape.len] {
            match slot.kind {
                Kind::Honest => h = h + acc.prob.clone(),
                Kind::Adversarial => a = a + acc.prob.clone(),
                _ => {}
            }
        }
        out.honest = out.honest + h;
        out.adversarial = out.adversarial + a;
        out.committed = out.committed + acc.committed;
        out.latency_sum = out.latency_sum + acc.latency_sum;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn all_honest_is_deterministic() {
        for v in ProtocolVariant::ALL {
            let e = window_oracle(v, AttackStrategy::None, &1.0, 30).unwrap();
            assert_eq!(e.honest, 30.0);
            assert_eq!(e.mean_latency(), Some(v.base_latency() as f64));
        }
    }

    #[test]
    fn single_round_forking() {
        let beta = BigRational::from_ratio(2, 3);
        let e = window_oracle(ProtocolVariant::HotStuffPipelined, AttackStrategy::Forking, &beta, 1).unwrap();
        assert_eq!(e.honest, beta);
    }

    #[test]
    fn long_horizon_approaches_growth_limit() {
        let beta = 2.0 / 3.0;
        let m = 20_000;
        let e = window_oracle(ProtocolVariant::HotStuffPipelined, AttackStrategy::Forking, &beta, m).unwrap();
        assert!((e.growth() - 8.0 / 27.0).abs() < 1e-3, "{}", e.growth());
    }
}
