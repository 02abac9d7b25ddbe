// SPDX-License-Identifier: Apache-2.0

//! Closed forms, Markov models, exact finite-horizon oracles and
//! concentration bounds.

mod concentration;
mod exact;
mod linalg;
mod markov;
mod scalar;
mod theory;
mod window;

pub use concentration::{concentration_bound, log_concentration_bound};
pub use exact::{exact_finite_horizon, ExactExpectations, ExactSums, MAX_ENUMERATION_ROUNDS};
pub use linalg::{mat_vec, solve, vec_mat, Matrix};
pub use markov::{
    hitting_times, hitting_times_closed_form, latency_by_composition, markov_model, stationary_closed_form,
    transition_matrix, HittingTimes, MarkovModel,
};
pub use scalar::{parse_rational, Scalar};
pub use theory::{theory_growth, theory_latency, theory_metric, theory_quality, ReferenceValue, REFERENCE_VALUES};
pub use window::{window_oracle, WINDOW_DEPTH};
