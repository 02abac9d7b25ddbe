// SPDX-License-Identifier: Apache-2.0

//! The block tree shared by every protocol variant.
//!
//! Blocks live in an arena indexed by [`BlockId`]. The tree only records
//! structure and certification; commit status belongs to the replica view so
//! that one tree can be inspected under different commit rules.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::block::{Block, BlockDescriptor, BlockId, ProposerKind, Round};
use crate::error::TreeError;

#[derive(Debug, Clone)]
pub struct BlockTree {
    blocks: Vec<Block>,
    certified_by_round: HashMap<Round, BlockId>,
    newest_certified: BlockId,
}

impl Default for BlockTree {
    fn default() -> Self {
        Self::new()
    }
}

impl BlockTree {
    /// A tree holding only genesis (round 0, certified, QC published).
    pub fn new() -> Self {
        let genesis = Block {
            id: BlockId::GENESIS,
            round: Round::GENESIS,
            parent: None,
            proposer: ProposerKind::Genesis,
            certified: true,
            qc_published: true,
        };
        let mut certified_by_round = HashMap::new();
        certified_by_round.insert(Round::GENESIS, BlockId::GENESIS);
        BlockTree {
            blocks: vec![genesis],
            certified_by_round,
            newest_certified: BlockId::GENESIS,
        }
    }

    pub fn genesis(&self) -> BlockId {
        BlockId::GENESIS
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Highest-round certified block whose QC has been published.
    pub fn newest_certified(&self) -> BlockId {
        self.newest_certified
    }

    pub fn get(&self, id: BlockId) -> Result<&Block, TreeError> {
        self.blocks.get(id.index()).ok_or(TreeError::UnknownBlock(id))
    }

    /// Panicking accessor for ids the caller obtained from this tree.
    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id.index()]
    }

    pub fn round(&self, id: BlockId) -> Round {
        self.block(id).round
    }

    pub fn parent(&self, id: BlockId) -> Option<BlockId> {
        self.block(id).parent
    }

    pub fn grandparent(&self, id: BlockId) -> Option<BlockId> {
        self.parent(id).and_then(|p| self.parent(p))
    }

    /// All blocks in insertion order, which is also round order.
    pub fn blocks(&self) -> std::slice::Iter<'_, Block> {
        self.blocks.iter()
    }

    /// Block certified at `round`, if any.
    pub fn certified_at(&self, round: Round) -> Option<BlockId> {
        self.certified_by_round.get(&round).copied()
    }

    pub fn insert_block(&mut self, desc: BlockDescriptor) -> Result<BlockId, TreeError> {
        let parent = self
            .blocks
            .get(desc.parent.index())
            .ok_or(TreeError::MissingParent(desc.parent))?;
        if desc.round <= parent.round {
            return Err(TreeError::RoundNotAboveParent {
                round: desc.round,
                parent_round: parent.round,
            });
        }
        if desc.certified && self.certified_by_round.contains_key(&desc.round) {
            return Err(TreeError::DuplicateCertifiedRound(desc.round));
        }
        let id = BlockId(self.blocks.len() as u32);
        self.blocks.push(Block {
            id,
            round: desc.round,
            parent: Some(desc.parent),
            proposer: desc.proposer,
            certified: desc.certified,
            qc_published: desc.certified && desc.qc_published,
        });
        if desc.certified {
            self.certified_by_round.insert(desc.round, id);
        }
        self.refresh_newest(id);
        Ok(id)
    }

    /// Marks a block certified with its QC published. Certification only ever
    /// moves from false to true.
    pub fn certify(&mut self, id: BlockId) -> Result<(), TreeError> {
        let round = self.get(id)?.round;
        match self.certified_by_round.get(&round) {
            Some(&other) if other != id => return Err(TreeError::DuplicateCertifiedRound(round)),
            _ => {}
        }
        self.certified_by_round.insert(round, id);
        let block = &mut self.blocks[id.index()];
        block.certified = true;
        block.qc_published = true;
        self.refresh_newest(id);
        Ok(())
    }

    fn refresh_newest(&mut self, id: BlockId) {
        let block = &self.blocks[id.index()];
        if block.has_published_qc() && block.round > self.blocks[self.newest_certified.index()].round {
            self.newest_certified = id;
        }
    }

    /// True iff `a` lies on the parent path from `b` to genesis (`a == b` counts).
    pub fn is_ancestor(&self, a: BlockId, b: BlockId) -> Result<bool, TreeError> {
        let target_round = self.get(a)?.round;
        let mut cur = self.get(b)?.id;
        loop {
            if cur == a {
                return Ok(true);
            }
            let block = self.block(cur);
            if block.round <= target_round {
                return Ok(false);
            }
            match block.parent {
                Some(p) => cur = p,
                None => return Ok(false),
            }
        }
    }

    /// Length of the run of uncommitted blocks ending at `tip` whose rounds are
    /// consecutive integers.
    pub fn consecutive_suffix_len<F>(&self, tip: BlockId, is_committed: F) -> usize
    where
        F: Fn(BlockId) -> bool,
    {
        let mut len = 0;
        let mut cur = tip;
        loop {
            if is_committed(cur) {
                return len;
            }
            len += 1;
            let block = self.block(cur);
            match block.parent {
                Some(p) if self.block(p).round.next() == block.round => cur = p,
                _ => return len,
            }
        }
    }

    /// Parent path from `tip` down to genesis, newest first.
    pub fn chain_from(&self, tip: BlockId) -> Vec<BlockId> {
        let mut out = Vec::new();
        let mut cur = Some(tip);
        while let Some(id) = cur {
            out.push(id);
            cur = self.parent(id);
        }
        out
    }

    /// One line per block: `round,proposer,parent_round,certified,qc_published`.
    /// Genesis has an empty parent round.
    pub fn trace_dump(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            let parent_round = b.parent.map(|p| self.round(p).to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                b.round, b.proposer, parent_round, b.certified, b.qc_published
            );
        }
        out
    }
}
