// SPDX-License-Identifier: Apache-2.0

//! Attack strategies: deterministic maps from the public chain state to the
//! adversarial leader's move.
//!
//! The adversary is rushing. It sees the whole tree and the honest lock
//! before it acts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::block::{BlockId, ProposerKind, Round};
use crate::error::ConfigError;
use crate::protocol::{ProtocolVariant, ReplicaView, RoundOutcome};
use crate::tree::BlockTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackStrategy {
    /// Byzantine leaders follow the protocol.
    None,
    /// Byzantine leaders never propose.
    Silent,
    /// Orphan recent honest blocks by extending the lock (or the newest
    /// adversarial block above it).
    Forking,
    DelayHotStuff,
    DelayLibra,
    DelayBroadcastQc,
}

impl AttackStrategy {
    pub const ALL: [AttackStrategy; 6] = [
        AttackStrategy::None,
        AttackStrategy::Silent,
        AttackStrategy::Forking,
        AttackStrategy::DelayHotStuff,
        AttackStrategy::DelayLibra,
        AttackStrategy::DelayBroadcastQc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackStrategy::None => "none",
            AttackStrategy::Silent => "silent",
            AttackStrategy::Forking => "forking",
            AttackStrategy::DelayHotStuff => "delay-hotstuff",
            AttackStrategy::DelayLibra => "delay-libra",
            AttackStrategy::DelayBroadcastQc => "delay-broadcast-qc",
        }
    }

    /// The delay attack tailored to `variant`.
    pub fn delay_for(variant: ProtocolVariant) -> AttackStrategy {
        match variant {
            ProtocolVariant::HotStuffPipelined => AttackStrategy::DelayHotStuff,
            ProtocolVariant::LibraBft => AttackStrategy::DelayLibra,
            ProtocolVariant::HotStuffBroadcastQc => AttackStrategy::DelayBroadcastQc,
        }
    }

    pub fn is_delay(self) -> bool {
        matches!(
            self,
            AttackStrategy::DelayHotStuff | AttackStrategy::DelayLibra | AttackStrategy::DelayBroadcastQc
        )
    }

    pub fn check_variant(self, variant: ProtocolVariant) -> Result<(), ConfigError> {
        let ok = match self {
            AttackStrategy::DelayHotStuff => variant == ProtocolVariant::HotStuffPipelined,
            AttackStrategy::DelayLibra => variant == ProtocolVariant::LibraBft,
            AttackStrategy::DelayBroadcastQc => variant == ProtocolVariant::HotStuffBroadcastQc,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(ConfigError::StrategyVariantMismatch {
                strategy: self.as_str(),
                variant: variant.as_str(),
            })
        }
    }

    /// Whether an adversarial LibraBFT leader releases the QC it holds for
    /// the previous round's block of kind `pending`.
    pub fn releases_pending(self, pending: ProposerKind, state: ChainStateClass) -> bool {
        match self {
            AttackStrategy::None | AttackStrategy::Silent => true,
            // an honest pending block is orphaned by the fork anyway
            AttackStrategy::Forking => pending == ProposerKind::Adversarial,
            AttackStrategy::DelayLibra => state != ChainStateClass::S3,
            AttackStrategy::DelayHotStuff | AttackStrategy::DelayBroadcastQc => true,
        }
    }
}

impl fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for AttackStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "honest" => Ok(AttackStrategy::None),
            "silent" | "crash" => Ok(AttackStrategy::Silent),
            "forking" | "fork" => Ok(AttackStrategy::Forking),
            "delay-hotstuff" => Ok(AttackStrategy::DelayHotStuff),
            "delay-libra" | "delay-librabft" => Ok(AttackStrategy::DelayLibra),
            "delay-broadcast-qc" | "delay-bqc" => Ok(AttackStrategy::DelayBroadcastQc),
            other => Err(format!(
                "unknown attack `{other}` (expected none, silent, forking, delay, delay-hotstuff, delay-libra or delay-broadcast-qc)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdversaryAction {
    /// Propose a child of `target`.
    ExtendBlock(BlockId),
    ProposeNothing,
    /// Show a proposal to half of the honest nodes so the round times out;
    /// optionally also sit on the QC of the previous round's block.
    VoteSplit { withhold: bool },
}

/// Chain-structure class used by the delay attacks and their Markov models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChainStateClass {
    /// The previous round produced no certified block.
    S0,
    S1,
    S2,
    /// Three or more consecutive uncommitted blocks end at the head.
    S3,
}

impl ChainStateClass {
    pub const ALL: [ChainStateClass; 4] = [
        ChainStateClass::S0,
        ChainStateClass::S1,
        ChainStateClass::S2,
        ChainStateClass::S3,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_run_len(len: usize) -> ChainStateClass {
        match len {
            0 | 1 => ChainStateClass::S1,
            2 => ChainStateClass::S2,
            _ => ChainStateClass::S3,
        }
    }
}

impl fmt::Display for ChainStateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.index())
    }
}

/// S0 after a timeout or a withheld QC, otherwise the capped length of the
/// uncommitted consecutive run ending at `head`. Before the first round
/// (`last_outcome == None`) genesis alone counts as S1.
pub fn classify_state(
    last_outcome: Option<&RoundOutcome>,
    tree: &BlockTree,
    head: BlockId,
    view: &ReplicaView,
) -> ChainStateClass {
    if last_outcome.is_some_and(RoundOutcome::is_timeout_like) {
        return ChainStateClass::S0;
    }
    ChainStateClass::from_run_len(tree.consecutive_suffix_len(head, |id| view.is_committed(id)))
}

/// Newest adversarial block with a published QC at or above `locked`; else
/// the block sitting at the lock.
pub fn forking_action(tree: &BlockTree, locked: Round) -> Result<AdversaryAction, ConfigError> {
    for block in tree.blocks().rev() {
        if block.round < locked {
            break;
        }
        if block.proposer == ProposerKind::Adversarial && block.has_published_qc() {
            return Ok(AdversaryAction::ExtendBlock(block.id));
        }
    }
    tree.certified_at(locked)
        .map(AdversaryAction::ExtendBlock)
        .ok_or_else(|| ConfigError::Invalid(format!("no certified block at locked round {locked}")))
}

/// Delay-attack move for `state`. `head` is the newest certified block.
pub fn delay_action(
    strategy: AttackStrategy,
    state: ChainStateClass,
    tree: &BlockTree,
    head: BlockId,
) -> Result<AdversaryAction, ConfigError> {
    match strategy {
        AttackStrategy::DelayHotStuff => Ok(match (state, tree.parent(head)) {
            (ChainStateClass::S3, Some(parent)) => AdversaryAction::ExtendBlock(parent),
            _ => AdversaryAction::ProposeNothing,
        }),
        AttackStrategy::DelayLibra => Ok(AdversaryAction::VoteSplit {
            withhold: state == ChainStateClass::S3,
        }),
        AttackStrategy::DelayBroadcastQc => Ok(AdversaryAction::ProposeNothing),
        other => Err(ConfigError::Invalid(format!("{other} is not a delay attack"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockDescriptor;
    use crate::protocol::OutcomeKind;

    fn push(t: &mut BlockTree, round: u64, parent: BlockId, kind: ProposerKind) -> BlockId {
        t.insert_block(BlockDescriptor::proposal(Round(round), parent, kind).certified())
            .unwrap()
    }

    fn outcome(round: u64, kind: OutcomeKind) -> RoundOutcome {
        RoundOutcome {
            round: Round(round),
            kind,
            withheld: None,
            rejected: false,
        }
    }

    #[test]
    fn classify_examples() {
        let mut t = BlockTree::new();
        let v = ReplicaView::new();
        let g = t.genesis();
        assert_eq!(classify_state(None, &t, g, &v), ChainStateClass::S1);

        let b6 = push(&mut t, 6, g, ProposerKind::Honest);
        let timeout = outcome(7, OutcomeKind::Timeout);
        assert_eq!(classify_state(Some(&timeout), &t, b6, &v), ChainStateClass::S0);

        let mut cur = b6;
        for r in 7..=10 {
            cur = push(&mut t, r, cur, ProposerKind::Honest);
        }
        let last = outcome(10, OutcomeKind::CertifiedBlock(cur));
        assert_eq!(classify_state(Some(&last), &t, cur, &v), ChainStateClass::S3);
    }

    #[test]
    fn override_resets_to_s1() {
        // 1,2,3 honest; adversary at 4 extends 2 (gap of two rounds to parent)
        let mut t = BlockTree::new();
        let v = ReplicaView::new();
        let b1 = push(&mut t, 1, BlockId::GENESIS, ProposerKind::Honest);
        let b2 = push(&mut t, 2, b1, ProposerKind::Honest);
        let _b3 = push(&mut t, 3, b2, ProposerKind::Honest);
        let a4 = push(&mut t, 4, b2, ProposerKind::Adversarial);
        let last = outcome(4, OutcomeKind::CertifiedBlock(a4));
        assert_eq!(classify_state(Some(&last), &t, a4, &v), ChainStateClass::S1);
    }

    #[test]
    fn forking_extends_lock_when_no_adversarial_block() {
        // B_k, B_{k+1}, B_{k+2} honest with lock k: extend B_k
        let mut t = BlockTree::new();
        let bk = push(&mut t, 5, BlockId::GENESIS, ProposerKind::Honest);
        let b6 = push(&mut t, 6, bk, ProposerKind::Honest);
        push(&mut t, 7, b6, ProposerKind::Honest);
        assert_eq!(forking_action(&t, Round(5)).unwrap(), AdversaryAction::ExtendBlock(bk));
    }

    #[test]
    fn forking_prefers_newest_adversarial_block() {
        let mut t = BlockTree::new();
        let b5 = push(&mut t, 5, BlockId::GENESIS, ProposerKind::Honest);
        let a6 = push(&mut t, 6, b5, ProposerKind::Adversarial);
        push(&mut t, 7, a6, ProposerKind::Honest);
        assert_eq!(forking_action(&t, Round(5)).unwrap(), AdversaryAction::ExtendBlock(a6));
        // adversarial block below the lock does not qualify
        assert_eq!(forking_action(&t, Round(7)).unwrap(), AdversaryAction::ExtendBlock(BlockId(3)));
    }

    #[test]
    fn forking_after_honest_triple_keeps_first() {
        // H_r, H_{r+1}, H_{r+2}: vote on H_{r+2} locks r
        let mut t = BlockTree::new();
        let mut v = ReplicaView::new();
        let hr = push(&mut t, 4, BlockId::GENESIS, ProposerKind::Honest);
        let h5 = push(&mut t, 5, hr, ProposerKind::Honest);
        let h6 = push(&mut t, 6, h5, ProposerKind::Honest);
        for id in [hr, h5, h6] {
            v.apply_vote(&t, id).unwrap();
        }
        assert_eq!(v.locked_round, Round(4));
        assert_eq!(forking_action(&t, v.locked_round).unwrap(), AdversaryAction::ExtendBlock(hr));
    }

    #[test]
    fn delay_actions() {
        let mut t = BlockTree::new();
        let b1 = push(&mut t, 1, BlockId::GENESIS, ProposerKind::Honest);
        let b2 = push(&mut t, 2, b1, ProposerKind::Honest);
        let b3 = push(&mut t, 3, b2, ProposerKind::Honest);
        assert_eq!(
            delay_action(AttackStrategy::DelayHotStuff, ChainStateClass::S3, &t, b3).unwrap(),
            AdversaryAction::ExtendBlock(b2)
        );
        assert_eq!(
            delay_action(AttackStrategy::DelayHotStuff, ChainStateClass::S2, &t, b3).unwrap(),
            AdversaryAction::ProposeNothing
        );
        for s in ChainStateClass::ALL {
            assert_eq!(
                delay_action(AttackStrategy::DelayBroadcastQc, s, &t, b3).unwrap(),
                AdversaryAction::ProposeNothing
            );
            assert_eq!(
                delay_action(AttackStrategy::DelayLibra, s, &t, b3).unwrap(),
                AdversaryAction::VoteSplit { withhold: s == ChainStateClass::S3 }
            );
        }
        assert!(delay_action(AttackStrategy::Forking, ChainStateClass::S1, &t, b3).is_err());
    }

    #[test]
    fn pairing_rules() {
        use ProtocolVariant::*;
        assert!(AttackStrategy::DelayLibra.check_variant(LibraBft).is_ok());
        assert!(AttackStrategy::DelayLibra.check_variant(HotStuffPipelined).is_err());
        assert!(AttackStrategy::DelayHotStuff.check_variant(HotStuffBroadcastQc).is_err());
        for v in ProtocolVariant::ALL {
            assert!(AttackStrategy::Forking.check_variant(v).is_ok());
            assert_eq!(AttackStrategy::delay_for(v).check_variant(v), Ok(()));
        }
    }
}
