// SPDX-License-Identifier: Apache-2.0

//! What broadcasting the QC buys: growth, quality and latency of
//! pipelined HotStuff against the broadcast-QC variant on the same leader
//! sequences.
//!
//! cargo run --release --example broadcast_qc

use hotstuff_perf::adversary::AttackStrategy;
use hotstuff_perf::protocol::ProtocolVariant::{self, HotStuffBroadcastQc, HotStuffPipelined};
use hotstuff_perf::sim::{aggregate, run_many, AggregateReport, SimConfig};

fn at_third(variant: ProtocolVariant, strategy: AttackStrategy) -> anyhow::Result<AggregateReport> {
    let mut cfg = SimConfig::new(3, 1, variant, strategy)
        .with_rounds(100_000)
        .with_runs(10)
        .with_seed(3);
    cfg.unsafe_override = true;
    Ok(aggregate(&run_many(&cfg)?).expect("ten runs"))
}

fn main() -> anyhow::Result<()> {
    let hs = at_third(HotStuffPipelined, AttackStrategy::Forking)?;
    let bqc = at_third(HotStuffBroadcastQc, AttackStrategy::Forking)?;
    let quality = |a: &AggregateReport| a.quality.as_ref().map_or(f64::NAN, |s| s.mean);
    println!("forking, alpha = 1/3");
    println!("  growth   {:.4} -> {:.4}  (x{:.3})", hs.growth.mean, bqc.growth.mean, bqc.growth.mean / hs.growth.mean);
    println!("  quality  {:.4} -> {:.4}  (x{:.3})", quality(&hs), quality(&bqc), quality(&bqc) / quality(&hs));

    let latency = |a: &AggregateReport| a.latency.as_ref().map_or(f64::NAN, |s| s.mean);
    let hs = at_third(HotStuffPipelined, AttackStrategy::DelayHotStuff)?;
    let bqc = at_third(HotStuffBroadcastQc, AttackStrategy::DelayBroadcastQc)?;
    println!("delay, alpha = 1/3");
    println!("  latency  {:.3} -> {:.3}  ({:.3} rounds saved)", latency(&hs), latency(&bqc), latency(&hs) - latency(&bqc));
    Ok(())
}
