// SPDX-License-Identifier: Apache-2.0

//! Commit latency of all three protocols under their delay attacks at
//! alpha = 1/3, next to the closed forms and the state-class occupancy the
//! Markov models predict.
//!
//! cargo run --release --example delay_attack

use hotstuff_perf::adversary::AttackStrategy;
use hotstuff_perf::analysis::{markov_model, theory_latency};
use hotstuff_perf::protocol::ProtocolVariant;
use hotstuff_perf::sim::{aggregate, run_many, SimConfig};

fn main() -> anyhow::Result<()> {
    let beta = 2.0 / 3.0;
    for variant in ProtocolVariant::ALL {
        let strategy = AttackStrategy::delay_for(variant);
        // n = 3, f = 1 gives alpha = 1/3 exactly but breaks n >= 3f + 1
        let mut cfg = SimConfig::new(3, 1, variant, strategy)
            .with_rounds(100_000)
            .with_runs(10)
            .with_seed(7);
        cfg.unsafe_override = true;
        let agg = aggregate(&run_many(&cfg)?).expect("ten runs");
        let latency = agg.latency.expect("blocks were committed");
        let theory = theory_latency(&beta, variant, strategy)?;
        println!(
            "{variant:<13} {strategy:<19} u3 = {:.3} +- {:.3}  closed form {:.3}",
            latency.mean,
            latency.ci95.unwrap_or(0.0),
            theory
        );

        let model = markov_model(variant, strategy, &beta)?;
        let states = model.states();
        let sim: Vec<String> = agg.occupancy[..states].iter().map(|p| format!("{p:.4}")).collect();
        let thy: Vec<String> = model.stationary.iter().map(|p| format!("{p:.4}")).collect();
        println!("{:33} occupancy {} vs stationary {}", "", sim.join(" "), thy.join(" "));
    }
    Ok(())
}
