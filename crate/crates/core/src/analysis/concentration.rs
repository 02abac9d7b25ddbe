// SPDX-License-Identifier: Apache-2.0

use crate::error::AnalysisError;

use super::theory::check_beta;

/// Tail bounds on the number of honest blocks surviving a forking attack:
/// `P(B_h < (1 - delta) beta^3 m) <= exp(-delta^2 beta^3 m / 6)` and
/// `P(B_h > (1 + delta) beta^3 m) <= exp(-delta^2 beta^3 m / 9)`.
pub fn concentration_bound(beta: f64, m: u64, delta: f64) -> Result<(f64, f64), AnalysisError> {
    check_beta(&beta)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AnalysisError::DeltaOutOfRange(delta));
    }
    let (lower, upper) = log_concentration_bound(beta, m, delta);
    Ok((lower.exp(), upper.exp()))
}

/// Natural logs of [`concentration_bound`].
pub fn log_concentration_bound(beta: f64, m: u64, delta: f64) -> (f64, f64) {
    let x = delta * delta * beta.powi(3) * m as f64;
    (-x / 6.0, -x / 9.0)
}
