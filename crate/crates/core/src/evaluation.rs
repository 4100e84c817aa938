//! Rate, capacity and fairness metrics, and side-by-side method comparison.

use std::time::{Duration, Instant};

use crate::assignment::AssignmentMatrix;
use crate::channel::ChannelMatrix;
use crate::exec::Execution;
use crate::power::{solve, PowerAllocation};
use crate::system::{Method, OfdmaProfile, Scenario};
use crate::{Error, Result};

/// `Σ_n log2(1 + p_n·H_n)` in bit/s per unit subcarrier bandwidth.
pub fn user_rate(gains: &[f64], powers: &[f64]) -> Result<f64> {
    if gains.len() != powers.len() {
        return Err(Error::invalid(format!(
            "{} gains but {} powers",
            gains.len(),
            powers.len()
        )));
    }
    if gains
        .iter()
        .chain(powers)
        .any(|v| !(v.is_finite() && *v >= 0.0))
    {
        return Err(Error::invalid("gains and powers must be finite and >= 0"));
    }
    Ok(gains
        .iter()
        .zip(powers)
        .map(|(h, p)| (1.0 + p * h).log2())
        .sum())
}

/// `(1/N)·Σ_k Σ_n c[k][n]·log2(1 + p[k][n]·H[k][n])` in bit/s/Hz.
pub fn total_capacity(
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    allocation: &PowerAllocation,
) -> Result<f64> {
    assignment.check_against(channel)?;
    if allocation.num_users() != assignment.num_users()
        || allocation.num_subcarriers() != assignment.num_subcarriers()
    {
        return Err(Error::invalid(
            "allocation and assignment dimensions differ",
        ));
    }
    let n = assignment.num_subcarriers();
    let sum: f64 = (0..n)
        .map(|sc| {
            let k = assignment.owner(sc);
            (1.0 + allocation.get(k, sc) * channel.get(k, sc)).log2()
        })
        .sum();
    Ok(sum / n as f64)
}

/// Worst gap between a user's share of the total rate and its target share:
/// `max_k |R_k/ΣR − γ_k|`.
pub fn proportionality_error(rates: &[f64], proportions: &[f64]) -> Result<f64> {
    if rates.len() != proportions.len() {
        return Err(Error::invalid(format!(
            "{} rates but {} proportions",
            rates.len(),
            proportions.len()
        )));
    }
    let total: f64 = rates.iter().sum();
    if total <= 0.0 {
        return Err(Error::UndefinedMetric(
            "proportionality error needs a nonzero total rate".into(),
        ));
    }
    Ok(rates
        .iter()
        .zip(proportions)
        .map(|(r, g)| (r / total - g).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub per_user_rate: Vec<f64>,
    pub per_user_power: Vec<f64>,
    /// Normalized capacity in bit/s/Hz.
    pub total_capacity: f64,
    pub proportionality_error: f64,
    /// `total_capacity` scaled by the profile bandwidth, in bit/s.
    pub physical_total_rate: f64,
}

impl RateReport {
    pub fn new(
        channel: &ChannelMatrix,
        assignment: &AssignmentMatrix,
        allocation: &PowerAllocation,
        proportions: &[f64],
        profile: &OfdmaProfile,
    ) -> Result<Self> {
        let per_user_rate = (0..assignment.num_users())
            .map(|k| {
                user_rate(
                    &assignment.gains_of(channel, k),
                    &allocation.powers_of(assignment, k),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let total_capacity = total_capacity(channel, assignment, allocation)?;
        Ok(Self {
            proportionality_error: proportionality_error(&per_user_rate, proportions)?,
            per_user_rate,
            per_user_power: allocation.per_user_totals().to_vec(),
            total_capacity,
            physical_total_rate: total_capacity * profile.bandwidth_hz(),
        })
    }
}

/// One method's outcome in a comparison.
#[derive(Debug, Clone)]
pub struct MethodRow {
    pub method: Method,
    pub outcome: Result<(PowerAllocation, RateReport)>,
    pub runtime: Duration,
}

/// Solves with one method and reports, timing the solve.
pub fn run_method(
    method: Method,
    scenario: &Scenario,
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    exec: Execution,
) -> MethodRow {
    let start = Instant::now();
    let solved = solve(method, channel, assignment, scenario, exec);
    let runtime = start.elapsed();
    let outcome = solved.and_then(|alloc| {
        let report = RateReport::new(
            channel,
            assignment,
            &alloc,
            &scenario.proportions,
            &scenario.profile,
        )?;
        Ok((alloc, report))
    });
    MethodRow {
        method,
        outcome,
        runtime,
    }
}

/// Runs all four methods on identical inputs. Rows come back in
/// [`Method::ALL`] order; a failing method yields an error row without
/// affecting the others.
pub fn compare_methods(
    scenario: &Scenario,
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
) -> Vec<MethodRow> {
    compare_methods_with(
        scenario,
        channel,
        assignment,
        &Method::ALL,
        Execution::default(),
    )
}

pub fn compare_methods_with(
    scenario: &Scenario,
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    methods: &[Method],
    exec: Execution,
) -> Vec<MethodRow> {
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    exec.map(&methods, |&m| {
        run_method(m, scenario, channel, assignment, exec)
    })
}
