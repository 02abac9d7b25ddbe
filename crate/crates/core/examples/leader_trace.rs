// SPDX-License-Identifier: Apache-2.0

//! Replays a hand-written leader sequence and prints the per-round trace:
//! who led, what they proposed, what was certified and what committed.
//!
//! cargo run --example leader_trace -- HHAHHHAHHH forking broadcast-qc

use hotstuff_perf::adversary::AttackStrategy;
use hotstuff_perf::protocol::ProtocolVariant;
use hotstuff_perf::sim::{simulate_run, LeaderSequence, SimConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let pattern = args.next().unwrap_or_else(|| "HHAHHHAHAHHHH".into());
    let strategy: AttackStrategy = args.next().as_deref().unwrap_or("forking").parse().map_err(anyhow::Error::msg)?;
    let variant: ProtocolVariant = args.next().as_deref().unwrap_or("hotstuff").parse().map_err(anyhow::Error::msg)?;

    let leaders = LeaderSequence::parse(&pattern)?;
    let cfg = SimConfig::new(4, 1, variant, strategy);
    let run = simulate_run(&cfg, &leaders)?;
    print!("{}", run.trace_csv());
    let r = &run.report;
    println!(
        "\nhonest in chain {}, adversarial {}, orphaned {}, timeouts {}, censored {}",
        r.honest_in_chain, r.adversarial_in_chain, r.orphaned, r.timeouts, r.censored
    );
    Ok(())
}
