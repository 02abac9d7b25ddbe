// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

/// Round index. Genesis lives in round 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Round(pub u64);

impl Round {
    pub const GENESIS: Round = Round(0);

    pub fn next(self) -> Round {
        Round(self.0 + 1)
    }

    /// Rounds elapsed from `earlier` to `self`.
    pub fn since(self, earlier: Round) -> u64 {
        self.0 - earlier.0
    }
}

impl fmt::Display for Round {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Arena index of a block inside its [`BlockTree`](crate::tree::BlockTree).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockId(pub u32);

impl BlockId {
    pub const GENESIS: BlockId = BlockId(0);

    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposerKind {
    Genesis,
    Honest,
    Adversarial,
    /// Leader-less placeholder certified on a LibraBFT timeout.
    Nil,
}

impl ProposerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProposerKind::Genesis => "genesis",
            ProposerKind::Honest => "honest",
            ProposerKind::Adversarial => "adversarial",
            ProposerKind::Nil => "nil",
        }
    }
}

impl fmt::Display for ProposerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

/// A proposal as seen by the honest quorum. Payload and signatures are not
/// modeled; only structure, round and proposer identity matter for the metrics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    pub round: Round,
    /// `None` only for genesis.
    pub parent: Option<BlockId>,
    pub proposer: ProposerKind,
    pub certified: bool,
    /// False while the QC is in flight to the next leader, or forever if that
    /// leader withheld it.
    pub qc_published: bool,
}

impl Block {
    pub fn is_genesis(&self) -> bool {
        self.parent.is_none()
    }

    pub fn has_published_qc(&self) -> bool {
        self.certified && self.qc_published
    }
}

/// Everything needed to insert a block; the tree assigns the id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockDescriptor {
    pub round: Round,
    pub parent: BlockId,
    pub proposer: ProposerKind,
    pub certified: bool,
    pub qc_published: bool,
}

impl BlockDescriptor {
    pub fn proposal(round: Round, parent: BlockId, proposer: ProposerKind) -> Self {
        BlockDescriptor {
            round,
            parent,
            proposer,
            certified: false,
            qc_published: false,
        }
    }

    pub fn certified(mut self) -> Self {
        self.certified = true;
        self.qc_published = true;
        self
    }
}
