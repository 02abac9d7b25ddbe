// SPDX-License-Identifier: Apache-2.0

//! Chain growth and quality of pipelined HotStuff under the forking attack,
//! swept over the number of faulty nodes in a 16-node system.
//!
//! cargo run --release --example forking_attack

use hotstuff_perf::adversary::AttackStrategy;
use hotstuff_perf::analysis::{theory_growth, theory_quality};
use hotstuff_perf::protocol::ProtocolVariant;
use hotstuff_perf::sim::{aggregate, run_many, SimConfig};

fn main() -> anyhow::Result<()> {
    let n = 16;
    println!("{:>2} {:>7} {:>9} {:>9} {:>9} {:>9}", "f", "alpha", "u1 sim", "u1 thy", "u2 sim", "u2 thy");
    for f in 0..=5 {
        let cfg = SimConfig::new(n, f, ProtocolVariant::HotStuffPipelined, AttackStrategy::Forking)
            .with_rounds(100_000)
            .with_runs(10)
            .with_seed(42);
        let agg = aggregate(&run_many(&cfg)?).expect("ten runs");
        let beta = cfg.beta();
        let g = theory_growth(&beta, cfg.variant, cfg.strategy)?;
        let q = theory_quality(&beta, cfg.variant, cfg.strategy)?;
        println!(
            "{f:>2} {:>7.4} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
            cfg.alpha(),
            agg.growth.mean,
            g,
            agg.quality.map_or(f64::NAN, |s| s.mean),
            q
        );
    }
    Ok(())
}
