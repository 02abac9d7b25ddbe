// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::block::{BlockId, Round};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unknown block {0:?}")]
    UnknownBlock(BlockId),
    #[error("parent {0:?} is not in the tree")]
    MissingParent(BlockId),
    #[error("block round {round} does not exceed parent round {parent_round}")]
    RoundNotAboveParent { round: Round, parent_round: Round },
    #[error("round {0} already holds a certified block")]
    DuplicateCertifiedRound(Round),
}

/// Rejected configuration. Maps to exit code 2 in the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("n >= 3f + 1 violated: n = {n}, f = {f} (pass --unsafe-override to explore)")]
    ResilienceBound { n: u32, f: u32 },
    #[error("n must be positive")]
    ZeroNodes,
    #[error("f = {f} exceeds n = {n}")]
    TooManyFaulty { n: u32, f: u32 },
    #[error("rounds m = {0} is below the minimum of 10")]
    TooFewRounds(u64),
    #[error("runs must be positive")]
    ZeroRuns,
    #[error("alpha = {0} outside [0, 1)")]
    AlphaOutOfRange(f64),
    #[error("strategy {strategy} cannot be paired with variant {variant}")]
    StrategyVariantMismatch {
        strategy: &'static str,
        variant: &'static str,
    },
    #[error("leader file: {0}")]
    LeaderFile(String),
    #[error("{0}")]
    Invalid(String),
}

/// A protocol invariant broke during a run. Always fatal (exit code 3).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("conflicting commit at round {round}: {block:?} does not extend last committed {last:?}")]
    ConflictingCommit {
        round: Round,
        block: BlockId,
        last: BlockId,
    },
    #[error("locked_round decreased from {from} to {to}")]
    LockDecreased { from: Round, to: Round },
    #[error("last_voted_round did not increase ({from} -> {to})")]
    VoteNotMonotone { from: Round, to: Round },
    #[error("adversarial proposal at round {0} violates the honest voting rule")]
    RejectedAdversarialProposal(Round),
    #[error("tree: {0}")]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
}

impl From<TreeError> for SimError {
    fn from(e: TreeError) -> Self {
        SimError::Invariant(InvariantViolation::Tree(e))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no closed form for {metric} under {variant}/{strategy}")]
    Unsupported {
        metric: &'static str,
        variant: &'static str,
        strategy: &'static str,
    },
    #[error("beta = 0: expected hitting times diverge")]
    Divergent,
    #[error("beta must lie in (0, 1], got {0}")]
    BetaOutOfRange(String),
    #[error("enumeration supports m <= {max}; got m = {m} (use the dp mode)")]
    HorizonTooLarge { m: u64, max: u64 },
    #[error("singular linear system")]
    Singular,
    #[error("window oracle: {0}")]
    Window(String),
    #[error("delta must lie in (0, 1), got {0}")]
    DeltaOutOfRange(f64),
    #[error("simulation failed inside an oracle: {0}")]
    Simulation(#[from] SimError),
}
