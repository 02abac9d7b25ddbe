// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use hotstuff_perf::adversary::{AttackStrategy, ChainStateClass};
use hotstuff_perf::block::{ProposerKind, Round};
use hotstuff_perf::protocol::{OutcomeKind, ProtocolVariant};
use hotstuff_perf::sim::{simulate_run, LeaderSequence, RunResult, SimConfig};

fn pairs() -> Vec<(ProtocolVariant, AttackStrategy)> {
    let mut out = Vec::new();
    for v in ProtocolVariant::ALL {
        for s in AttackStrategy::ALL {
            if s.check_variant(v).is_ok() {
                out.push((v, s));
            }
        }
    }
    out
}

fn any_pair() -> impl Strategy<Value = (ProtocolVariant, AttackStrategy)> {
    prop::sample::select(pairs())
}

fn any_variant() -> impl Strategy<Value = ProtocolVariant> {
    prop::sample::select(ProtocolVariant::ALL.to_vec())
}

fn leaders(len: std::ops::Range<usize>) -> impl Strategy<Value = LeaderSequence> {
    prop::collection::vec(prop::bool::weighted(0.65), len).prop_map(LeaderSequence::from_bits)
}

fn run(variant: ProtocolVariant, strategy: AttackStrategy, leaders: &LeaderSequence) -> RunResult {
    let cfg = SimConfig::new(4, 1, variant, strategy);
    simulate_run(&cfg, leaders).expect("run completes without invariant violations")
}

fn lock_before(r: &RunResult, round: u64) -> Round {
    if round <= 1 {
        Round(0)
    } else {
        r.trace[round as usize - 2].locked_round
    }
}

fn on_main_chain(r: &RunResult) -> Vec<bool> {
    let mut on = vec![false; r.tree.len()];
    for id in &r.main_chain {
        on[id.0 as usize] = true;
    }
    on
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn committed_blocks_form_one_chain((v, s) in any_pair(), l in leaders(1..300)) {
        let r = run(v, s, &l);
        let log = r.view.commit_log();
        for w in log.windows(2) {
            prop_assert!(r.tree.is_ancestor(w[0].0, w[1].0).unwrap());
            prop_assert!(w[0].1 <= w[1].1);
        }
        let on = on_main_chain(&r);
        for &(id, at) in log {
            prop_assert!(on[id.0 as usize]);
            prop_assert!(r.tree.round(id) < at || (v == ProtocolVariant::HotStuffBroadcastQc && r.tree.round(id) <= at));
        }
    }

    #[test]
    fn locks_never_decrease((v, s) in any_pair(), l in leaders(1..300)) {
        let r = run(v, s, &l);
        let mut prev = Round(0);
        for rec in &r.trace {
            prop_assert!(rec.locked_round >= prev);
            prop_assert!(rec.locked_round < rec.round);
            prev = rec.locked_round;
        }
    }

    /// Replays the voting rule against every certified block.
    #[test]
    fn certified_blocks_pass_the_voting_rule((v, s) in any_pair(), l in leaders(1..300)) {
        let r = run(v, s, &l);
        let mut last_round = Round(0);
        for b in r.tree.blocks().filter(|b| b.certified && !b.is_genesis()) {
            let parent = b.parent.unwrap();
            let pr = r.tree.round(parent);
            prop_assert!(pr < b.round);
            if b.proposer != ProposerKind::Nil {
                prop_assert!(pr >= lock_before(&r, b.round.0), "block at {} extends {} below lock {}", b.round, pr, lock_before(&r, b.round.0));
            }
            prop_assert!(b.round > last_round, "vote rounds strictly increase");
            last_round = b.round;
        }
    }

    #[test]
    fn rounds_are_conserved((v, s) in any_pair(), l in leaders(1..300)) {
        let r = run(v, s, &l);
        prop_assert!(r.report.conserves_rounds(), "{:?}", r.report);
        prop_assert_eq!(r.report.occupancy.iter().sum::<u64>(), l.len() as u64);
        prop_assert_eq!(r.report.latency_samples.len() as u64 + r.report.censored, r.report.honest_in_chain);
    }

    #[test]
    fn same_seed_same_run((v, s) in any_pair(), seed in any::<u64>(), alpha in 0.0f64..0.6) {
        let cfg = SimConfig::new(4, 1, v, s).with_rounds(200).with_seed(seed).with_alpha(alpha);
        let a = hotstuff_perf::sim::simulate_seeded(&cfg).unwrap();
        let b = hotstuff_perf::sim::simulate_seeded(&cfg).unwrap();
        prop_assert_eq!(a.report, b.report);
        prop_assert_eq!(a.trace, b.trace);
        prop_assert_eq!(a.main_chain, b.main_chain);
    }

    /// Under forking, an honest block of round r <= m - k survives exactly
    /// when the next k leaders are honest: k = 2, or 1 with broadcast QCs.
    #[test]
    fn forking_survival_law(v in any_variant(), l in leaders(3..300)) {
        let r = run(v, AttackStrategy::Forking, &l);
        let k = if v == ProtocolVariant::HotStuffBroadcastQc { 1 } else { 2 };
        let on = on_main_chain(&r);
        let m = l.len() as u64;
        for b in r.tree.blocks().filter(|b| b.proposer == ProposerKind::Honest) {
            let rr = b.round.0;
            if rr + k > m {
                continue;
            }
            let next_honest = (1..=k).all(|j| l.is_honest(rr + j));
            prop_assert_eq!(on[b.id.0 as usize], next_honest, "honest block at round {}", rr);
        }
    }

    /// Forking never costs the adversary a block and never leaves a round
    /// without one.
    #[test]
    fn forking_adversarial_blocks_all_survive(v in any_variant(), l in leaders(1..300)) {
        let r = run(v, AttackStrategy::Forking, &l);
        let adversarial = (l.len() - l.honest_count()) as u64;
        prop_assert_eq!(r.report.adversarial_in_chain, adversarial);
        prop_assert_eq!(r.report.timeouts, 0);
        prop_assert_eq!(r.report.nil_in_chain, 0);
    }

    /// Broadcast QCs lock one round earlier, so on the same leaders the lock
    /// never trails pipelined HotStuff's.
    #[test]
    fn broadcast_qc_lock_dominates(l in leaders(1..300), silent in any::<bool>()) {
        let s = if silent { AttackStrategy::Silent } else { AttackStrategy::None };
        let hs = run(ProtocolVariant::HotStuffPipelined, s, &l);
        let bqc = run(ProtocolVariant::HotStuffBroadcastQc, s, &l);
        for (a, b) in hs.trace.iter().zip(&bqc.trace) {
            prop_assert!(b.locked_round >= a.locked_round, "round {}: {} < {}", a.round, b.locked_round, a.locked_round);
        }
    }

    /// Delay attacks move the state class exactly as the Markov models say.
    #[test]
    fn delay_state_transitions(v in any_variant(), l in leaders(2..300)) {
        let s = AttackStrategy::delay_for(v);
        let r = run(v, s, &l);
        let top = if v == ProtocolVariant::HotStuffBroadcastQc { 2 } else { 3 };
        prop_assert_eq!(r.trace[0].state, ChainStateClass::S1);
        // genesis is committed and not part of the suffix, so round 1 starts
        // at S1 and an honest first block leaves it there
        for w in r.trace.windows(2).skip(1) {
            let from = w[0].state.index();
            let to = w[1].state.index();
            let expect = if w[0].honest_leader {
                (from + 1).min(top)
            } else if v == ProtocolVariant::HotStuffPipelined && from == 3 {
                1
            } else {
                0
            };
            prop_assert_eq!(to, expect, "round {}: S{} -> S{}", w[0].round, from, to);
        }
    }

    #[test]
    fn alpha_zero_is_attack_free((v, s) in any_pair(), m in 10usize..300) {
        let l = LeaderSequence::from_bits(vec![true; m]);
        let r = run(v, s, &l);
        prop_assert_eq!(r.report.honest_in_chain, m as u64);
        prop_assert!(r.report.latency_samples.iter().all(|&d| d == v.base_latency()));
        prop_assert!(r.trace.iter().all(|rec| matches!(rec.outcome, OutcomeKind::CertifiedBlock(_))));
    }

    #[test]
    fn leader_text_round_trips(l in leaders(1..200)) {
        prop_assert_eq!(LeaderSequence::parse(&l.to_text()).unwrap(), l);
    }
}
