// SPDX-License-Identifier: Apache-2.0

//! Spread of the honest block count under forking against the Chernoff
//! tail bounds.
//!
//! cargo run --release --example concentration

use hotstuff_perf::adversary::AttackStrategy;
use hotstuff_perf::analysis::concentration_bound;
use hotstuff_perf::protocol::ProtocolVariant;
use hotstuff_perf::sim::{run_many, SimConfig};

fn main() -> anyhow::Result<()> {
    let m = 10_000;
    let beta: f64 = 2.0 / 3.0;
    let mut cfg = SimConfig::new(3, 1, ProtocolVariant::HotStuffPipelined, AttackStrategy::Forking)
        .with_rounds(m)
        .with_runs(200)
        .with_seed(1);
    cfg.unsafe_override = true;
    let counts: Vec<f64> = run_many(&cfg)?.iter().map(|r| r.honest_in_chain as f64).collect();
    let centre = beta.powi(3) * m as f64;
    for delta in [0.02, 0.05, 0.1] {
        let below = counts.iter().filter(|&&c| c < (1.0 - delta) * centre).count();
        let above = counts.iter().filter(|&&c| c > (1.0 + delta) * centre).count();
        let (lo, hi) = concentration_bound(beta, m, delta)?;
        println!(
            "delta {delta:<5} below {:>5.3} (bound {:.3e})  above {:>5.3} (bound {:.3e})",
            below as f64 / counts.len() as f64,
            lo,
            above as f64 / counts.len() as f64,
            hi
        );
    }
    Ok(())
}
