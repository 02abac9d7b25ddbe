// SPDX-License-Identifier: Apache-2.0

use num_rational::BigRational;

use hotstuff_perf::adversary::AttackStrategy;
use hotstuff_perf::analysis::{
    markov_model, parse_rational, stationary_closed_form, theory_metric, window_oracle, ExactSums, Scalar,
};
use hotstuff_perf::protocol::ProtocolVariant;
use hotstuff_perf::sim::{aggregate, run_many, Metric, SimConfig};

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

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

#[test]
fn window_dp_equals_enumeration_exactly() {
    for (v, s) in pairs() {
        for m in [1, 2, 5, 9, 12] {
            let sums = ExactSums::enumerate(v, s, m).unwrap();
            for beta in ["2/3", "3/5", "1"] {
                let b = q(beta);
                let e = sums.expectations(&b);
                let d = window_oracle(v, s, &b, m).unwrap();
                assert_eq!(e, d, "{v}/{s} m = {m} beta = {beta}");
            }
        }
    }
}

#[test]
fn finite_horizon_growth_approaches_the_limit() {
    let beta = 2.0 / 3.0;
    for v in ProtocolVariant::ALL {
        let limit = theory_metric(Metric::Growth, &beta, v, AttackStrategy::Forking).unwrap();
        let mut prev = f64::INFINITY;
        for m in [8, 12, 16, 20] {
            let g = window_oracle(v, AttackStrategy::Forking, &beta, m).unwrap().growth();
            let gap = (g - limit).abs();
            assert!(gap < prev, "{v}: gap {gap} at m = {m} did not shrink");
            // boundary effects are O(1/m)
            assert!(gap <= 2.0 / m as f64, "{v}: gap {gap} at m = {m}");
            prev = gap;
        }
    }
}

#[test]
fn long_horizon_dp_meets_the_closed_forms() {
    let beta = 2.0 / 3.0;
    let m = 6000;
    for v in ProtocolVariant::ALL {
        let fork = window_oracle(v, AttackStrategy::Forking, &beta, m).unwrap();
        let g = theory_metric(Metric::Growth, &beta, v, AttackStrategy::Forking).unwrap();
        let qual = theory_metric(Metric::Quality, &beta, v, AttackStrategy::Forking).unwrap();
        assert!((fork.growth() - g).abs() / g < 2e-3, "{v} growth");
        assert!((fork.quality().unwrap() - qual).abs() / qual < 2e-3, "{v} quality");

        let s = AttackStrategy::delay_for(v);
        let delay = window_oracle(v, s, &beta, m).unwrap();
        let lat = theory_metric(Metric::Latency, &beta, v, s).unwrap();
        assert!((delay.mean_latency().unwrap() - lat).abs() / lat < 5e-3, "{v} latency");
    }
}

#[test]
fn simulated_occupancy_matches_stationary_law() {
    let beta = q("2/3");
    for v in ProtocolVariant::ALL {
        let s = AttackStrategy::delay_for(v);
        let model = markov_model(v, s, &beta).unwrap();
        assert_eq!(model.stationary, stationary_closed_form(v, &beta));
        let cfg = SimConfig::new(3, 1, v, s).with_rounds(100_000).with_runs(4).with_seed(11);
        let cfg = SimConfig {
            unsafe_override: true,
            ..cfg
        };
        let agg = aggregate(&run_many(&cfg).unwrap()).unwrap();
        for (i, p) in model.stationary.iter().enumerate() {
            assert!((agg.occupancy[i] - p.to_f64()).abs() < 0.01, "{v} S{i}: {} vs {}", agg.occupancy[i], p.to_f64());
        }
    }
}
