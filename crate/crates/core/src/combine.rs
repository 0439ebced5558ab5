//! Combining the sum and max p-values.

use crate::dist::cauchy_sf;
use crate::error::{Error, Result};
use crate::outcome::{Method, TestOutcome};

/// Clip bound keeping `tan((0.5 − p)π)` finite.
pub const P_CLIP: f64 = 1e-15;

fn check_probability(p: f64, name: &str) -> Result<()> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

/// Cauchy combination with equal weights:
/// `1 − G[½ tan{(½ − p_max)π} + ½ tan{(½ − p_sum)π}]`.
pub fn cauchy_combine(p_max: f64, p_sum: f64) -> Result<TestOutcome> {
    check_probability(p_max, "p_max")?;
    check_probability(p_sum, "p_sum")?;
    let transform = |p: f64| 0.5 * ((0.5 - p.clamp(P_CLIP, 1.0 - P_CLIP)) * std::f64::consts::PI).tan();
    let stat = transform(p_max) + transform(p_sum);
    TestOutcome::new(Method::CauchyCombo, stat, None, cauchy_sf(stat).clamp(0.0, 1.0))
}

/// Minimal-p combination reported as the adjusted p-value
/// `1 − (1 − min(p_max, p_sum))²`, so rejecting at level γ is the rule
/// `min ≤ 1 − √(1 − γ)`.
pub fn min_p_combine(p_max: f64, p_sum: f64) -> Result<TestOutcome> {
    check_probability(p_max, "p_max")?;
    check_probability(p_sum, "p_sum")?;
    let m = p_max.min(p_sum);
    let adjusted = 1.0 - (1.0 - m) * (1.0 - m);
    TestOutcome::new(Method::MinPCombo, m, None, adjusted.clamp(0.0, 1.0))
}
