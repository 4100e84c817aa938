//! Power allocation: the shared water-filling kernel and the four solvers.

pub mod activeset;
pub mod ga;
pub mod linear;
pub mod rootfind;

use crate::assignment::AssignmentMatrix;
use crate::channel::ChannelMatrix;
use crate::exec::Execution;
use crate::system::{Method, Scenario};
use crate::{Error, Result};

/// Per-subcarrier powers `p[k][n]` plus per-user totals `P_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    num_users: usize,
    num_subcarriers: usize,
    powers: Vec<f64>,
    per_user: Vec<f64>,
}

impl PowerAllocation {
    /// Scatters per-user power vectors (in each user's ascending subcarrier
    /// order) into the `K×N` grid.
    pub fn from_user_powers(assignment: &AssignmentMatrix, user_powers: &[Vec<f64>]) -> Self {
        let k = assignment.num_users();
        let n = assignment.num_subcarriers();
        assert_eq!(user_powers.len(), k, "one power vector per user");
        let mut powers = vec![0.0; k * n];
        let mut per_user = vec![0.0; k];
        for (user, up) in user_powers.iter().enumerate() {
            let scs = assignment.subcarriers_of(user);
            assert_eq!(scs.len(), up.len(), "power vector matches the user's quota");
            for (&sc, &p) in scs.iter().zip(up) {
                powers[user * n + sc] = p;
            }
            per_user[user] = up.iter().sum();
        }
        Self {
            num_users: k,
            num_subcarriers: n,
            powers,
            per_user,
        }
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    #[inline]
    pub fn get(&self, user: usize, subcarrier: usize) -> f64 {
        self.powers[user * self.num_subcarriers + subcarrier]
    }

    pub fn row(&self, user: usize) -> &[f64] {
        let start = user * self.num_subcarriers;
        &self.powers[start..start + self.num_subcarriers]
    }

    /// `P_k` for every user.
    pub fn per_user_totals(&self) -> &[f64] {
        &self.per_user
    }

    pub fn total(&self) -> f64 {
        self.per_user.iter().sum()
    }

    /// Powers on the subcarriers owned by `user`, in subcarrier order.
    pub fn powers_of(&self, assignment: &AssignmentMatrix, user: usize) -> Vec<f64> {
        assignment
            .subcarriers_of(user)
            .into_iter()
            .map(|n| self.get(user, n))
            .collect()
    }
}

/// Result of water-filling a budget over parallel channels.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFill {
    pub powers: Vec<f64>,
    /// Water level `μ`: every active channel has `p + 1/H = μ`.
    pub level: f64,
}

/// Water-fills `budget` over `gains` by active-set iteration: start with all
/// channels active, set `μ = (budget + Σ 1/H)/|active|`, drop every channel
/// with `μ < 1/H`, repeat until no channel is dropped.
pub(crate) fn water_fill(gains: &[f64], budget: f64) -> Result<WaterFill> {
    if gains.is_empty() {
        return Err(Error::invalid("water-filling needs at least one channel"));
    }
    if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::invalid(format!("channel gain must be > 0, got {g}")));
    }
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::invalid(format!(
            "power budget must be >= 0, got {budget}"
        )));
    }
    let inv: Vec<f64> = gains.iter().map(|g| 1.0 / g).collect();
    let mut active = vec![true; gains.len()];
    let mut level;
    loop {
        let (count, sum_inv) = active
            .iter()
            .zip(&inv)
            .filter(|(a, _)| **a)
            .fold((0usize, 0.0), |(c, s), (_, i)| (c + 1, s + i));
        level = (budget + sum_inv) / count as f64;
        let mut dropped = false;
        for (a, &i) in active.iter_mut().zip(&inv) {
            // Never drop the last channel; with a zero budget it sits at p = 0.
            if *a && i > level && count > 1 {
                *a = false;
                dropped = true;
            }
        }
        if !dropped {
            break;
        }
    }
    let mut powers: Vec<f64> = active
        .iter()
        .zip(&inv)
        .map(|(&a, &i)| if a { (level - i).max(0.0) } else { 0.0 })
        .collect();
    // `level − 1/H` cancels badly when 1/H dwarfs the budget; spread the
    // leftover evenly over the active channels.
    let count = active.iter().filter(|a| **a).count() as f64;
    let leftover = (budget - powers.iter().sum::<f64>()) / count;
    for (p, &a) in powers.iter_mut().zip(&active) {
        if a {
            *p = (*p + leftover).max(0.0);
        }
    }
    level += leftover;
    Ok(WaterFill { powers, level })
}

/// Largest violation of the water-filling optimality conditions: active
/// channels share the level `μ` (`p + 1/H = μ`) and inactive ones satisfy
/// `1/H ≥ μ`. Returns 0 for an all-zero allocation.
pub fn waterfill_kkt_residual(gains: &[f64], powers: &[f64]) -> f64 {
    let levels: Vec<f64> = gains
        .iter()
        .zip(powers)
        .filter(|(_, p)| **p > 0.0)
        .map(|(g, p)| p + 1.0 / g)
        .collect();
    if levels.is_empty() {
        return 0.0;
    }
    let mu = levels.iter().sum::<f64>() / levels.len() as f64;
    let spread = levels.iter().map(|l| (l - mu).abs()).fold(0.0, f64::max);
    let inactive = gains
        .iter()
        .zip(powers)
        .filter(|(_, p)| **p <= 0.0)
        .map(|(g, _)| (mu - 1.0 / g).max(0.0))
        .fold(0.0, f64::max);
    spread.max(inactive)
}

/// Shared validation and per-user gain extraction for the solvers.
pub(crate) fn user_gains(
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    proportions: &[f64],
    total_power: f64,
) -> Result<Vec<Vec<f64>>> {
    assignment.check_against(channel)?;
    if proportions.len() != assignment.num_users() {
        return Err(Error::invalid(format!(
            "{} proportions for {} users",
            proportions.len(),
            assignment.num_users()
        )));
    }
    if proportions.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::invalid("every proportion must be > 0"));
    }
    if !(total_power.is_finite() && total_power > 0.0) {
        return Err(Error::invalid(format!(
            "total power must be > 0, got {total_power}"
        )));
    }
    let gains: Vec<Vec<f64>> = (0..assignment.num_users())
        .map(|k| assignment.gains_of(channel, k))
        .collect();
    if gains.iter().flatten().any(|&g| g <= 0.0) {
        return Err(Error::invalid("assigned subcarriers must have gain > 0"));
    }
    Ok(gains)
}

/// Runs one solver with the scenario's parameters.
pub fn solve(
    method: Method,
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    scenario: &Scenario,
    exec: Execution,
) -> Result<PowerAllocation> {
    let gamma = &scenario.proportions;
    let total = scenario.total_power;
    match method {
        Method::Linear => linear::linear_power_split(channel, assignment, gamma, total),
        Method::Rootfind => rootfind::rootfind_power_split(channel, assignment, gamma, total),
        Method::ActiveSet => activeset::activeset_power_split(channel, assignment, gamma, total),
        Method::Ga => ga::ga_power_split_with(
            channel,
            assignment,
            gamma,
            total,
            &scenario.ga_params,
            scenario.seed,
            exec,
        )
        .map(|(alloc, _)| alloc),
    }
}
