// SPDX-License-Identifier: Apache-2.0

//! Honest replica rules for pipelined HotStuff, LibraBFT and HotStuff with
//! broadcast QCs.
//!
//! Synchrony lets every honest node see the round's block by the end of the
//! round, so one [`ReplicaView`] stands for the whole honest quorum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::block::{Block, BlockDescriptor, BlockId, ProposerKind, Round};
use crate::error::{InvariantViolation, TreeError};
use crate::tree::BlockTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolVariant {
    /// QCs are relayed to the next leader; commit on the first block extending
    /// a 3-direct chain.
    HotStuffPipelined,
    /// Votes go straight to the next leader, who forms the QC; silent leaders
    /// are replaced by certified Nil blocks.
    LibraBft,
    /// The current leader broadcasts the QC: locks move on QC receipt and a
    /// 3-direct chain commits as soon as its last QC is seen.
    HotStuffBroadcastQc,
}

impl ProtocolVariant {
    pub const ALL: [ProtocolVariant; 3] = [
        ProtocolVariant::HotStuffPipelined,
        ProtocolVariant::LibraBft,
        ProtocolVariant::HotStuffBroadcastQc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolVariant::HotStuffPipelined => "hotstuff",
            ProtocolVariant::LibraBft => "librabft",
            ProtocolVariant::HotStuffBroadcastQc => "broadcast-qc",
        }
    }

    pub fn has_nil_blocks(self) -> bool {
        self == ProtocolVariant::LibraBft
    }

    /// Whether a block's QC is formed by the next leader rather than in the
    /// proposing round.
    pub fn certifies_next_round(self) -> bool {
        self == ProtocolVariant::LibraBft
    }

    /// Commit latency with no adversary.
    pub fn base_latency(self) -> u64 {
        match self {
            ProtocolVariant::HotStuffBroadcastQc => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for ProtocolVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for ProtocolVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hotstuff" | "hotstuff-pipelined" | "pipelined" => Ok(ProtocolVariant::HotStuffPipelined),
            "librabft" | "libra" | "diembft" => Ok(ProtocolVariant::LibraBft),
            "broadcast-qc" | "broadcastqc" | "hotstuff-broadcast-qc" | "bqc" => {
                Ok(ProtocolVariant::HotStuffBroadcastQc)
            }
            other => Err(format!(
                "unknown variant `{other}` (expected hotstuff, librabft or broadcast-qc)"
            )),
        }
    }
}

/// Canonical state of the synchronized honest quorum.
#[derive(Debug, Clone)]
pub struct ReplicaView {
    pub last_voted_round: Round,
    pub locked_round: Round,
    pub newest_certified: BlockId,
    /// Block behind `last_voted_round`, if the last vote was for a block.
    pub last_voted_block: Option<BlockId>,
    committed: Vec<bool>,
    last_committed: BlockId,
    commit_log: Vec<(BlockId, Round)>,
}

impl Default for ReplicaView {
    fn default() -> Self {
        Self::new()
    }
}

impl ReplicaView {
    /// Genesis is round 0, certified and committed; lock and vote start at 0.
    pub fn new() -> Self {
        ReplicaView {
            last_voted_round: Round::GENESIS,
            locked_round: Round::GENESIS,
            newest_certified: BlockId::GENESIS,
            last_voted_block: None,
            committed: vec![true],
            last_committed: BlockId::GENESIS,
            commit_log: Vec::new(),
        }
    }

    pub fn is_committed(&self, id: BlockId) -> bool {
        self.committed.get(id.index()).copied().unwrap_or(false)
    }

    pub fn last_committed(&self) -> BlockId {
        self.last_committed
    }

    /// `(block, commit_round)` in commit order. Genesis is not logged.
    pub fn commit_log(&self) -> &[(BlockId, Round)] {
        &self.commit_log
    }

    fn mark_committed(&mut self, id: BlockId) {
        let idx = id.index();
        if self.committed.len() <= idx {
            self.committed.resize(idx + 1, false);
        }
        self.committed[idx] = true;
    }

    /// Voting rule: the round must be fresh and the parent must not sit
    /// below the lock.
    pub fn voting_decision(&self, round: Round, parent_round: Round) -> bool {
        round > self.last_voted_round && parent_round >= self.locked_round
    }

    pub fn would_vote(&self, tree: &BlockTree, block: &Block) -> bool {
        match block.parent {
            Some(p) => self.voting_decision(block.round, tree.round(p)),
            None => false,
        }
    }

    /// Records a vote on `block`: bumps `last_voted_round`, raises the lock to
    /// the grandparent's round and adopts the parent QC carried by the block.
    pub fn apply_vote(&mut self, tree: &BlockTree, block: BlockId) -> Result<(), InvariantViolation> {
        let b = tree.get(block)?;
        if b.round <= self.last_voted_round {
            return Err(InvariantViolation::VoteNotMonotone {
                from: self.last_voted_round,
                to: b.round,
            });
        }
        self.last_voted_round = b.round;
        self.last_voted_block = Some(block);
        if let Some(gp) = tree.grandparent(block) {
            self.raise_lock(tree.round(gp));
        }
        if let Some(p) = b.parent {
            if tree.round(p) > tree.round(self.newest_certified) {
                self.newest_certified = p;
            }
        }
        Ok(())
    }

    /// Broadcast-QC lock rule: seeing the QC of `certified` locks its parent.
    /// A no-op under the other variants.
    pub fn update_lock_on_qc(&mut self, tree: &BlockTree, certified: BlockId, variant: ProtocolVariant) {
        if variant != ProtocolVariant::HotStuffBroadcastQc {
            return;
        }
        if let Some(p) = tree.parent(certified) {
            self.raise_lock(tree.round(p));
        }
        if tree.round(certified) > tree.round(self.newest_certified) {
            self.newest_certified = certified;
        }
    }

    fn raise_lock(&mut self, round: Round) {
        if round > self.locked_round {
            self.locked_round = round;
        }
    }

    /// Honest leaders extend the newest certified block with a direct child,
    /// whatever the round gap.
    pub fn honest_proposal(&self, tree: &BlockTree, round: Round) -> BlockDescriptor {
        BlockDescriptor::proposal(round, tree.newest_certified(), ProposerKind::Honest)
    }

    /// Commits triggered in `current_round`.
    ///
    /// HotStuff and LibraBFT need a block voted this round that extends the
    /// third block of a 3-direct chain (Nil placeholders are links, never
    /// triggers). With broadcast QCs, the QC of the third block is enough.
    pub fn detect_commits(
        &mut self,
        tree: &BlockTree,
        variant: ProtocolVariant,
        current_round: Round,
    ) -> Result<Vec<(BlockId, Round)>, InvariantViolation> {
        let third = match variant {
            ProtocolVariant::HotStuffBroadcastQc => tree
                .certified_at(current_round)
                .filter(|&id| tree.block(id).qc_published),
            ProtocolVariant::HotStuffPipelined | ProtocolVariant::LibraBft => self
                .last_voted_block
                .filter(|&id| {
                    let b = tree.block(id);
                    b.round == current_round && b.proposer != ProposerKind::Nil
                })
                .and_then(|id| tree.parent(id)),
        };
        let Some(b3) = third else {
            return Ok(Vec::new());
        };
        let Some(first) = direct_chain_head(tree, b3) else {
            return Ok(Vec::new());
        };
        self.commit_with_ancestors(tree, first, current_round)
    }

    fn commit_with_ancestors(
        &mut self,
        tree: &BlockTree,
        head: BlockId,
        round: Round,
    ) -> Result<Vec<(BlockId, Round)>, InvariantViolation> {
        let mut fresh = Vec::new();
        let mut cur = head;
        while !self.is_committed(cur) {
            fresh.push(cur);
            cur = tree.parent(cur).ok_or(TreeError::UnknownBlock(cur))?;
        }
        if fresh.is_empty() {
            return Ok(Vec::new());
        }
        if cur != self.last_committed {
            return Err(InvariantViolation::ConflictingCommit {
                round,
                block: head,
                last: self.last_committed,
            });
        }
        fresh.reverse();
        for &id in &fresh {
            self.mark_committed(id);
            self.commit_log.push((id, round));
        }
        self.last_committed = head;
        Ok(fresh.into_iter().map(|id| (id, round)).collect())
    }
}

/// First block of the 3-direct chain ending at `third`, if the three rounds
/// are consecutive.
pub fn direct_chain_head(tree: &BlockTree, third: BlockId) -> Option<BlockId> {
    let second = tree.parent(third)?;
    let first = tree.parent(second)?;
    let (r1, r2, r3) = (tree.round(first), tree.round(second), tree.round(third));
    (r2 == r1.next() && r3 == r2.next()).then_some(first)
}

/// What the leader of a round puts forward, after strategy selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeaderProposal {
    Block { parent: BlockId, proposer: ProposerKind },
    Nothing,
    /// Proposal shown to half of the honest nodes only: neither it nor a Nil
    /// block gathers a quorum.
    VoteSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "block")]
pub enum OutcomeKind {
    /// A block the honest quorum voted for. Under LibraBFT its QC is still in
    /// flight to the next leader.
    CertifiedBlock(BlockId),
    CertifiedNil(BlockId),
    Timeout,
    /// The previous round's QC was withheld and nothing was certified.
    UncertifiedBlock(BlockId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub round: Round,
    pub kind: OutcomeKind,
    /// Block whose QC the leader of this round refused to publish.
    pub withheld: Option<BlockId>,
    /// An adversarial proposal the honest quorum refused to vote for.
    pub rejected: bool,
}

impl RoundOutcome {
    pub fn is_timeout_like(&self) -> bool {
        matches!(self.kind, OutcomeKind::Timeout | OutcomeKind::UncertifiedBlock(_))
    }

    pub fn voted_block(&self) -> Option<BlockId> {
        match self.kind {
            OutcomeKind::CertifiedBlock(id) | OutcomeKind::CertifiedNil(id) => Some(id),
            _ => None,
        }
    }
}

/// Applies the variant's QC plumbing for one round and inserts whatever the
/// honest quorum certifies (or votes for, under LibraBFT).
///
/// LibraBFT leaders hold the QC of the previous round's block; the caller
/// publishes it with [`BlockTree::certify`] beforehand or passes it here as
/// `withheld`.
pub fn certify_round(
    variant: ProtocolVariant,
    proposal: LeaderProposal,
    withheld: Option<BlockId>,
    view: &ReplicaView,
    tree: &mut BlockTree,
    round: Round,
) -> Result<RoundOutcome, TreeError> {
    let mut rejected = false;
    let kind = match proposal {
        LeaderProposal::Block { parent, proposer } => {
            let parent_round = tree.get(parent)?.round;
            if view.voting_decision(round, parent_round) {
                let mut desc = BlockDescriptor::proposal(round, parent, proposer);
                if !variant.certifies_next_round() {
                    desc = desc.certified();
                }
                OutcomeKind::CertifiedBlock(tree.insert_block(desc)?)
            } else {
                rejected = true;
                OutcomeKind::Timeout
            }
        }
        LeaderProposal::Nothing if variant.has_nil_blocks() => {
            let desc = BlockDescriptor::proposal(round, tree.newest_certified(), ProposerKind::Nil);
            OutcomeKind::CertifiedNil(tree.insert_block(desc.certified())?)
        }
        LeaderProposal::Nothing | LeaderProposal::VoteSplit => match withheld {
            Some(w) => OutcomeKind::UncertifiedBlock(w),
            None => OutcomeKind::Timeout,
        },
    };
    Ok(RoundOutcome {
        round,
        kind,
        withheld,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Chain of honest certified blocks at the given rounds on top of genesis.
    fn chain(rounds: &[u64]) -> (BlockTree, Vec<BlockId>) {
        let mut t = BlockTree::new();
        let mut ids = Vec::new();
        let mut parent = t.genesis();
        for &r in rounds {
            parent = t
                .insert_block(BlockDescriptor::proposal(Round(r), parent, ProposerKind::Honest).certified())
                .unwrap();
            ids.push(parent);
        }
        (t, ids)
    }

    fn view(last_voted: u64, locked: u64) -> ReplicaView {
        let mut v = ReplicaView::new();
        v.last_voted_round = Round(last_voted);
        v.locked_round = Round(locked);
        v
    }

    #[test]
    fn voting_rule_examples() {
        assert!(view(4, 3).voting_decision(Round(5), Round(4)));
        assert!(!view(4, 3).voting_decision(Round(5), Round(2)));
        assert!(!view(4, 0).voting_decision(Round(4), Round(3)));
        assert!(!view(4, 0).voting_decision(Round(4), Round(100)));
    }

    #[test]
    fn vote_locks_grandparent() {
        // B_k <- B_{k+1} <- B_{k+2}, k = 5, lock k-1
        let (t, ids) = chain(&[4, 5, 6, 7]);
        let mut v = view(6, 4);
        v.apply_vote(&t, ids[3]).unwrap();
        assert_eq!(v.locked_round, Round(5));
        assert_eq!(v.last_voted_round, Round(7));
    }

    #[test]
    fn vote_on_block_extending_third_of_chain() {
        // B_k..B_{k+2} at 10,11,12, then B_{k+4} at 14 extends B_{k+2}
        let (mut t, ids) = chain(&[10, 11, 12]);
        let b14 = t
            .insert_block(BlockDescriptor::proposal(Round(14), ids[2], ProposerKind::Honest).certified())
            .unwrap();
        let mut v = view(12, 10);
        v.apply_vote(&t, b14).unwrap();
        assert_eq!(v.last_voted_round, Round(14));
        assert_eq!(v.locked_round, Round(11));
    }

    #[test]
    fn vote_on_genesis_child_keeps_lock() {
        let (t, ids) = chain(&[1]);
        let mut v = ReplicaView::new();
        v.apply_vote(&t, ids[0]).unwrap();
        assert_eq!(v.locked_round, Round(0));
        assert_eq!(v.newest_certified, t.genesis());
    }

    #[test]
    fn stale_vote_is_an_invariant_violation() {
        let (t, ids) = chain(&[1, 2]);
        let mut v = view(2, 0);
        assert!(matches!(
            v.apply_vote(&t, ids[0]),
            Err(InvariantViolation::VoteNotMonotone { .. })
        ));
    }

    #[test]
    fn qc_lock_update_only_with_broadcast() {
        let (t, ids) = chain(&[5, 6, 7]);
        let mut v = view(7, 5);
        v.update_lock_on_qc(&t, ids[2], ProtocolVariant::HotStuffPipelined);
        assert_eq!(v.locked_round, Round(5));
        v.update_lock_on_qc(&t, ids[2], ProtocolVariant::HotStuffBroadcastQc);
        assert_eq!(v.locked_round, Round(6));

        let (t1, first) = chain(&[1]);
        let mut v1 = ReplicaView::new();
        v1.update_lock_on_qc(&t1, first[0], ProtocolVariant::HotStuffBroadcastQc);
        assert_eq!(v1.locked_round, Round(0));
    }

    #[test]
    fn honest_proposal_extends_newest_certified() {
        let (t, ids) = chain(&[3, 4]);
        let v = ReplicaView::new();
        let p = v.honest_proposal(&t, Round(5));
        assert_eq!((p.round, p.parent), (Round(5), ids[1]));
        let p = v.honest_proposal(&t, Round(6));
        assert_eq!((p.round, p.parent), (Round(6), ids[1]));
    }

    #[test]
    fn commit_on_first_extension() {
        let (mut t, ids) = chain(&[1, 2, 3]);
        let mut v = ReplicaView::new();
        for &id in &ids {
            v.apply_vote(&t, id).unwrap();
        }
        let b4 = t
            .insert_block(BlockDescriptor::proposal(Round(4), ids[2], ProposerKind::Honest).certified())
            .unwrap();
        v.apply_vote(&t, b4).unwrap();
        let c = v.detect_commits(&t, ProtocolVariant::HotStuffPipelined, Round(4)).unwrap();
        assert_eq!(c, vec![(ids[0], Round(4))]);
        assert!(v.is_committed(ids[0]) && !v.is_committed(ids[1]));
    }

    #[test]
    fn broadcast_qc_commits_on_third_qc() {
        let (t, ids) = chain(&[1, 2, 3]);
        let mut v = ReplicaView::new();
        let c = v.detect_commits(&t, ProtocolVariant::HotStuffBroadcastQc, Round(3)).unwrap();
        assert_eq!(c, vec![(ids[0], Round(3))]);
    }

    #[test]
    fn nil_block_links_a_direct_chain() {
        let mut t = BlockTree::new();
        let g = t.genesis();
        let ins = |t: &mut BlockTree, r, p, k| {
            t.insert_block(BlockDescriptor::proposal(Round(r), p, k).certified()).unwrap()
        };
        let b1 = ins(&mut t, 1, g, ProposerKind::Honest);
        let b2 = ins(&mut t, 2, b1, ProposerKind::Honest);
        let nil = ins(&mut t, 3, b2, ProposerKind::Nil);
        let b4 = ins(&mut t, 4, nil, ProposerKind::Honest);
        let mut v = ReplicaView::new();
        for id in [b1, b2, nil, b4] {
            v.apply_vote(&t, id).unwrap();
        }
        let c = v.detect_commits(&t, ProtocolVariant::LibraBft, Round(4)).unwrap();
        assert_eq!(c, vec![(b1, Round(4))]);
    }

    #[test]
    fn conflicting_commit_detected() {
        // two forks each with a 3-direct chain
        let mut t = BlockTree::new();
        let g = t.genesis();
        let mk = |t: &mut BlockTree, r, p| {
            t.insert_block(BlockDescriptor::proposal(Round(r), p, ProposerKind::Honest).certified())
                .unwrap()
        };
        let a1 = mk(&mut t, 1, g);
        let a2 = mk(&mut t, 2, a1);
        let a3 = mk(&mut t, 3, a2);
        let mut v = ReplicaView::new();
        v.detect_commits(&t, ProtocolVariant::HotStuffBroadcastQc, Round(3)).unwrap();
        assert!(v.is_committed(a1));
        let _ = a3;
        let b5 = mk(&mut t, 5, g);
        let b6 = mk(&mut t, 6, b5);
        let _b7 = mk(&mut t, 7, b6);
        let err = v.detect_commits(&t, ProtocolVariant::HotStuffBroadcastQc, Round(7));
        assert!(matches!(err, Err(InvariantViolation::ConflictingCommit { .. })));
    }

    #[test]
    fn certify_round_plumbing() {
        let v = ReplicaView::new();
        let mut t = BlockTree::new();
        let g = t.genesis();
        let out = certify_round(
            ProtocolVariant::HotStuffPipelined,
            LeaderProposal::Block { parent: g, proposer: ProposerKind::Honest },
            None,
            &v,
            &mut t,
            Round(1),
        )
        .unwrap();
        let OutcomeKind::CertifiedBlock(b1) = out.kind else { panic!("{out:?}") };
        assert!(t.block(b1).has_published_qc());

        // LibraBFT: vote-split with nothing pending is a plain timeout
        let out = certify_round(
            ProtocolVariant::LibraBft,
            LeaderProposal::VoteSplit,
            None,
            &v,
            &mut t,
            Round(2),
        )
        .unwrap();
        assert_eq!(out.kind, OutcomeKind::Timeout);

        // LibraBFT: honest block at r stays pending, withheld at r+1
        let mut lt = BlockTree::new();
        let out = certify_round(
            ProtocolVariant::LibraBft,
            LeaderProposal::Block { parent: lt.genesis(), proposer: ProposerKind::Honest },
            None,
            &v,
            &mut lt,
            Round(1),
        )
        .unwrap();
        let OutcomeKind::CertifiedBlock(p) = out.kind else { panic!() };
        assert!(!lt.block(p).certified);
        let out = certify_round(
            ProtocolVariant::LibraBft,
            LeaderProposal::VoteSplit,
            Some(p),
            &v,
            &mut lt,
            Round(2),
        )
        .unwrap();
        assert_eq!(out.kind, OutcomeKind::UncertifiedBlock(p));
        assert_eq!(lt.newest_certified(), lt.genesis());

        // LibraBFT: silent leader yields a Nil block on the published pending block
        let mut nt = BlockTree::new();
        let out = certify_round(
            ProtocolVariant::LibraBft,
            LeaderProposal::Block { parent: nt.genesis(), proposer: ProposerKind::Honest },
            None,
            &v,
            &mut nt,
            Round(1),
        )
        .unwrap();
        let OutcomeKind::CertifiedBlock(p) = out.kind else { panic!() };
        nt.certify(p).unwrap();
        let out = certify_round(
            ProtocolVariant::LibraBft,
            LeaderProposal::Nothing,
            None,
            &v,
            &mut nt,
            Round(2),
        )
        .unwrap();
        let OutcomeKind::CertifiedNil(nil) = out.kind else { panic!() };
        assert_eq!(nt.parent(nil), Some(p));
    }
}
