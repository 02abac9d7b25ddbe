// SPDX-License-Identifier: Apache-2.0

//! Finite-horizon expectations three ways: all 2^m leader sequences through
//! the engine, the window dynamic program, and plain Monte Carlo.
//!
//! cargo run --release --example exact_oracle

use hotstuff_perf::adversary::AttackStrategy;
use hotstuff_perf::analysis::{parse_rational, window_oracle, ExactSums, Scalar};
use hotstuff_perf::protocol::ProtocolVariant;
use hotstuff_perf::sim::{simulate_run, LeaderSequence, SimConfig};

fn main() -> anyhow::Result<()> {
    let m = 16;
    let beta = parse_rational("2/3").expect("literal");
    for strategy in [AttackStrategy::Forking, AttackStrategy::DelayHotStuff] {
        let variant = ProtocolVariant::HotStuffPipelined;
        let exact = ExactSums::enumerate(variant, strategy, m)?.expectations(&beta);
        let dp = window_oracle(variant, strategy, &beta, m)?;
        println!("{strategy}, m = {m}: enumeration and DP agree exactly: {}", exact == dp);
        println!("  E[B_h] = {} ~ {:.6}", exact.honest, exact.honest.to_f64());

        let cfg = SimConfig::new(3, 1, variant, strategy).with_rounds(m);
        let runs = 10_000;
        let total: u64 = (0..runs)
            .map(|i| {
                let leaders = LeaderSequence::generate(i, m, 1.0 / 3.0);
                simulate_run(&cfg, &leaders).map(|r| r.report.honest_in_chain)
            })
            .sum::<Result<u64, _>>()?;
        println!("  Monte Carlo over {runs} runs: {:.6}", total as f64 / runs as f64);

        let long = window_oracle(variant, strategy, &(2.0 / 3.0), 5_000)?;
        println!(
            "  DP at m = 5000: growth {:.5}, quality {:.5}, latency {:.4}",
            long.growth(),
            long.quality().unwrap_or(f64::NAN),
            long.mean_latency().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
