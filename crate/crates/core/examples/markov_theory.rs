// SPDX-License-Identifier: Apache-2.0

//! Exact rational evaluation of the delay-attack Markov models: stationary
//! law, hitting times, and latency by composition against the closed form.
//!
//! cargo run --example markov_theory -- 2/3

use hotstuff_perf::adversary::AttackStrategy;
use hotstuff_perf::analysis::{hitting_times, latency_by_composition, markov_model, parse_rational, theory_latency};
use hotstuff_perf::protocol::ProtocolVariant;

fn main() -> anyhow::Result<()> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "2/3".into());
    let beta = parse_rational(&arg).ok_or_else(|| anyhow::anyhow!("not a rational: {arg}"))?;
    println!("beta = {beta}");
    for variant in ProtocolVariant::ALL {
        let strategy = AttackStrategy::delay_for(variant);
        let model = markov_model(variant, strategy, &beta)?;
        let hits = hitting_times(variant, strategy, &beta)?;
        let composed = latency_by_composition(variant, &beta)?;
        let closed = theory_latency(&beta, variant, strategy)?;
        let show = |v: &[num_rational::BigRational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        println!("{variant}");
        println!("  stationary   [{}]", show(&model.stationary));
        println!("  E[X_i]       [{}]", show(&hits.expected));
        println!("  latency      {composed} (closed form {closed}, equal: {})", composed == closed);
    }
    Ok(())
}
