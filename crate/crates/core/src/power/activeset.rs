//! Active-set method: capacity-maximizing water-filling over every assigned
//! subcarrier at once.
//!
//! Maximizing `Σ log2(1 + p_n·H_n)` subject to `Σ p_n = P` and `p_n ≥ 0` is a
//! concave program whose KKT conditions give `p_n = max(0, μ − 1/H_n)`. The
//! active set (subcarriers with `p_n > 0`) is found by starting from all of
//! them and deactivating those below the water line until the level settles.
//! Per-user totals are whatever the pooled solution hands each user; rate
//! shares are steered only by the subcarrier quotas.

use super::{user_gains, water_fill, PowerAllocation};
use crate::assignment::AssignmentMatrix;
use crate::channel::ChannelMatrix;
use crate::{Error, Result};

/// Water-fills `total_power` over the pooled gains.
pub fn global_waterfill(gains: &[f64], total_power: f64) -> Result<Vec<f64>> {
    if !(total_power.is_finite() && total_power > 0.0) {
        return Err(Error::invalid(format!(
            "total power must be > 0, got {total_power}"
        )));
    }
    water_fill(gains, total_power).map(|wf| wf.powers)
}

pub fn activeset_power_split(
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    proportions: &[f64],
    total_power: f64,
) -> Result<PowerAllocation> {
    user_gains(channel, assignment, proportions, total_power)?;
    let pooled: Vec<f64> = (0..assignment.num_subcarriers())
        .map(|n| channel.get(assignment.owner(n), n))
        .collect();
    let powers = global_waterfill(&pooled, total_power)?;
    let user_powers: Vec<Vec<f64>> = (0..assignment.num_users())
        .map(|k| {
            assignment
                .subcarriers_of(k)
                .into_iter()
                .map(|n| powers[n])
                .collect()
        })
        .collect();
    Ok(PowerAllocation::from_user_powers(assignment, &user_powers))
}
