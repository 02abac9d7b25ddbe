// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::adversary::{classify_state, delay_action, forking_action, AdversaryAction, AttackStrategy, ChainStateClass};
use crate::block::{BlockId, ProposerKind, Round};
use crate::error::{InvariantViolation, SimError};
use crate::protocol::{certify_round, LeaderProposal, OutcomeKind, ReplicaView, RoundOutcome};
use crate::tree::BlockTree;

use super::config::SimConfig;
use super::leaders::LeaderSequence;
use super::metrics::MetricsReport;

/// One line of the per-round trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: Round,
    pub honest_leader: bool,
    pub action: TraceAction,
    /// Block of the previous round whose QC this leader kept to itself.
    pub withheld: Option<BlockId>,
    pub outcome: OutcomeKind,
    /// State class seen by the leader at the start of the round.
    pub state: ChainStateClass,
    pub locked_round: Round,
    /// Rounds of the blocks committed at the end of this round.
    pub commits: Vec<Round>,
}

impl RoundRecord {
    pub const HEADER: &'static str = "round,leader,action,outcome,state_class,commits";

    pub fn csv_line(&self, tree: &BlockTree) -> String {
        let outcome = match self.outcome {
            OutcomeKind::CertifiedBlock(id) => format!("certified:{}", tree.block(id).proposer),
            OutcomeKind::CertifiedNil(_) => "nil".to_string(),
            OutcomeKind::Timeout => "timeout".to_string(),
            OutcomeKind::UncertifiedBlock(id) => format!("withheld:{}", tree.round(id)),
        };
        let commits: Vec<String> = self.commits.iter().map(Round::to_string).collect();
        format!(
            "{},{},{}{},{},{},{}",
            self.round,
            if self.honest_leader { 'H' } else { 'A' },
            self.action,
            if self.withheld.is_some() { "+withhold" } else { "" },
            outcome,
            self.state,
            commits.join(";")
        )
    }
}

/// Everything a run produced: the metrics plus the raw material to audit them.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub report: MetricsReport,
    pub trace: Vec<RoundRecord>,
    pub tree: BlockTree,
    pub view: ReplicaView,
    /// Frozen main chain at the horizon, newest first, genesis last.
    pub main_chain: Vec<BlockId>,
}

impl RunResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from(RoundRecord::HEADER);
        out.push('\n');
        for rec in &self.trace {
            out.push_str(&rec.csv_line(&self.tree));
            out.push('\n');
        }
        out
    }
}

/// What the leader of a round did, as recorded in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceAction {
    Extend { parent_round: Round },
    Nothing,
    VoteSplit,
}

impl fmt::Display for TraceAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceAction::Extend { parent_round } => write!(f, "extend:{parent_round}"),
            TraceAction::Nothing => f.write_str("nothing"),
            TraceAction::VoteSplit => f.write_str("vote-split"),
        }
    }
}

/// Executes rounds `1..=leaders.len()` and freezes the main chain at the end.
///
/// `config` supplies the variant and strategy; its horizon and seed are not
/// consulted, the leader sequence decides both.
pub fn simulate_run(config: &SimConfig, leaders: &LeaderSequence) -> Result<RunResult, SimError> {
    config.strategy.check_variant(config.variant)?;
    let variant = config.variant;
    let strategy = config.strategy;
    let m = leaders.len() as u64;

    let mut tree = BlockTree::new();
    let mut view = ReplicaView::new();
    let mut trace = Vec::with_capacity(m as usize);
    let mut occupancy = [0u64; 4];
    let mut last_outcome: Option<RoundOutcome> = None;
    // LibraBFT block voted last round whose QC sits with this round's leader
    let mut pending: Option<BlockId> = None;

    for r in 1..=m {
        let round = Round(r);
        let honest = leaders.is_honest(r);
        let head = pending.unwrap_or_else(|| tree.newest_certified());
        let state = classify_state(last_outcome.as_ref(), &tree, head, &view);
        occupancy[state.index()] += 1;

        let release = match pending {
            Some(p) if !honest => strategy.releases_pending(tree.block(p).proposer, state),
            _ => true,
        };
        let withheld = if release {
            if let Some(p) = pending {
                tree.certify(p)?;
            }
            None
        } else {
            pending
        };
        pending = None;

        let proposal = if honest {
            LeaderProposal::Block {
                parent: tree.newest_certified(),
                proposer: ProposerKind::Honest,
            }
        } else {
            adversarial_proposal(strategy, state, &tree, &view)?
        };
        let action = match proposal {
            LeaderProposal::Block { parent, .. } => TraceAction::Extend {
                parent_round: tree.round(parent),
            },
            LeaderProposal::Nothing => TraceAction::Nothing,
            LeaderProposal::VoteSplit => TraceAction::VoteSplit,
        };

        let outcome = certify_round(variant, proposal, withheld, &view, &mut tree, round)?;
        if outcome.rejected {
            return Err(InvariantViolation::RejectedAdversarialProposal(round).into());
        }

        let lock_before = view.locked_round;
        if let Some(voted) = outcome.voted_block() {
            view.apply_vote(&tree, voted)?;
            match outcome.kind {
                OutcomeKind::CertifiedBlock(id) if variant.certifies_next_round() => pending = Some(id),
                OutcomeKind::CertifiedBlock(id) => view.update_lock_on_qc(&tree, id, variant),
                _ => {}
            }
        }
        if view.locked_round < lock_before {
            return Err(InvariantViolation::LockDecreased {
                from: lock_before,
                to: view.locked_round,
            }
            .into());
        }

        let commits = view.detect_commits(&tree, variant, round)?;
        trace.push(RoundRecord {
            round,
            honest_leader: honest,
            action,
            withheld,
            outcome: outcome.kind,
            state,
            locked_round: view.locked_round,
            commits: commits.iter().map(|&(id, _)| tree.round(id)).collect(),
        });
        last_outcome = Some(outcome);
    }

    let tip = pending.unwrap_or_else(|| tree.newest_certified());
    if !tree.is_ancestor(view.last_committed(), tip)? {
        return Err(InvariantViolation::ConflictingCommit {
            round: Round(m),
            block: tip,
            last: view.last_committed(),
        }
        .into());
    }
    let main_chain = tree.chain_from(tip);
    let timeouts = trace
        .iter()
        .filter(|rec| matches!(rec.outcome, OutcomeKind::Timeout | OutcomeKind::UncertifiedBlock(_)))
        .count() as u64;
    let report = MetricsReport::measure(&tree, &view, &main_chain, m, timeouts, occupancy);
    Ok(RunResult {
        report,
        trace,
        tree,
        view,
        main_chain,
    })
}

fn adversarial_proposal(
    strategy: AttackStrategy,
    state: ChainStateClass,
    tree: &BlockTree,
    view: &ReplicaView,
) -> Result<LeaderProposal, SimError> {
    let action = match strategy {
        AttackStrategy::None => AdversaryAction::ExtendBlock(tree.newest_certified()),
        AttackStrategy::Silent => AdversaryAction::ProposeNothing,
        AttackStrategy::Forking => forking_action(tree, view.locked_round)?,
        _ => delay_action(strategy, state, tree, tree.newest_certified())?,
    };
    Ok(match action {
        AdversaryAction::ExtendBlock(parent) => LeaderProposal::Block {
            parent,
            proposer: ProposerKind::Adversarial,
        },
        AdversaryAction::ProposeNothing => LeaderProposal::Nothing,
        AdversaryAction::VoteSplit { .. } => LeaderProposal::VoteSplit,
    })
}

/// Convenience for tests and examples: one run of `config` on the seed's own
/// leader sequence.
pub fn simulate_seeded(config: &SimConfig) -> Result<RunResult, SimError> {
    let leaders = LeaderSequence::generate(config.seed, config.rounds, config.alpha());
    simulate_run(config, &leaders)
}
