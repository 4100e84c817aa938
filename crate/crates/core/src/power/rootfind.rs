//! Root-finding baseline: exact proportional rates for arbitrary quotas.
//!
//! The outer unknown is user 1's total `P_1`. For a trial `P_1` every other
//! user's total is the unique `P_k` with `R_k(P_k)/γ_k = R_1(P_1)/γ_1`, where
//! `R_k` is the water-filled rate (strictly increasing and concave in `P_k`).
//! The budget residual `Σ P_k − P_total` is increasing in `P_1`, runs from
//! `−P_total` at `P_1 = 0` to `Σ_{k≥2} P_k ≥ 0` at `P_1 = P_total`, and its
//! root is the allocation.

use std::f64::consts::LN_2;

use super::{user_gains, water_fill, PowerAllocation};
use crate::assignment::AssignmentMatrix;
use crate::channel::ChannelMatrix;
use crate::{Error, Result};

/// Accepted budget residual, relative to the total power.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Residual targeted before giving up on further refinement.
const RESIDUAL_TARGET: f64 = 1e-13;
const MAX_OUTER_ITERS: usize = 200;
const MAX_INNER_ITERS: usize = 200;

/// Outer root strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootStrategy {
    /// Newton steps on a central finite-difference slope, falling back to
    /// bisection whenever a step leaves the bracket.
    #[default]
    Newton,
    /// Plain bisection on `[0, P_total]`.
    Bisection,
}

struct Problem {
    gains: Vec<Vec<f64>>,
    proportions: Vec<f64>,
    total_power: f64,
}

/// Water-filled rate and its slope `dR/dP = 1/(μ ln 2)`.
fn rate_and_slope(gains: &[f64], budget: f64) -> (f64, f64) {
    let wf = water_fill(gains, budget).expect("validated gains and budget");
    let rate = gains
        .iter()
        .zip(&wf.powers)
        .map(|(h, p)| (1.0 + p * h).log2())
        .sum();
    (rate, 1.0 / (wf.level * LN_2))
}

/// Smallest budget whose water-filled rate reaches `target`.
fn invert_rate(gains: &[f64], target: f64, scale: f64) -> Result<f64> {
    if target <= 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = scale.max(f64::MIN_POSITIVE);
    let mut grown = 0;
    while rate_and_slope(gains, hi).0 < target {
        lo = hi;
        hi *= 2.0;
        grown += 1;
        if grown > 2000 || !hi.is_finite() {
            return Err(Error::numerical(format!(
                "cannot bracket a budget reaching rate {target}"
            )));
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_INNER_ITERS {
        let (r, slope) = rate_and_slope(gains, x);
        let f = r - target;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - f / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

impl Problem {
    fn new(
        channel: &ChannelMatrix,
        assignment: &AssignmentMatrix,
        proportions: &[f64],
        total_power: f64,
    ) -> Result<Self> {
        Ok(Self {
            gains: user_gains(channel, assignment, proportions, total_power)?,
            proportions: proportions.to_vec(),
            total_power,
        })
    }

    /// Per-user totals implied by a trial `P_1`.
    fn totals(&self, p1: f64) -> Result<Vec<f64>> {
        let (r1, _) = rate_and_slope(&self.gains[0], p1);
        let per_share = r1 / self.proportions[0];
        let mut totals = Vec::with_capacity(self.gains.len());
        totals.push(p1);
        for (g, &gamma) in self.gains.iter().zip(&self.proportions).skip(1) {
            totals.push(invert_rate(g, gamma * per_share, self.total_power)?);
        }
        Ok(totals)
    }

    fn residual(&self, p1: f64) -> Result<f64> {
        Ok(self.totals(p1)?.iter().sum::<f64>() - self.total_power)
    }

    fn solve(&self, strategy: RootStrategy) -> Result<f64> {
        let total = self.total_power;
        if self.gains.len() == 1 {
            return Ok(total);
        }
        let (mut lo, mut hi) = (0.0, total);
        let f_lo = self.residual(lo)?;
        let f_hi = self.residual(hi)?;
        if !(f_lo <= 0.0 && f_hi >= 0.0) {
            return Err(Error::Numerical {
                message: "budget residual is not bracketed on [0, total_power]".into(),
                bracket: Some((lo, f_lo, hi, f_hi)),
            });
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        let target = RESIDUAL_TARGET * total;
        let step = 1e-6 * total;
        let mut x = match strategy {
            RootStrategy::Newton => self.proportions[0] * total,
            RootStrategy::Bisection => 0.5 * total,
        };
        let mut best = (f_lo.abs(), lo);
        for _ in 0..MAX_OUTER_ITERS {
            let f = self.residual(x)?;
            if f.abs() < best.0 {
                best = (f.abs(), x);
            }
            if f.abs() <= target {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mid = 0.5 * (lo + hi);
            let next = match strategy {
                RootStrategy::Bisection => mid,
                RootStrategy::Newton => {
                    let a = (x - step).max(0.0);
                    let b = (x + step).min(total);
                    let slope = (self.residual(b)? - self.residual(a)?) / (b - a);
                    let newton = x - f / slope;
                    if slope > 0.0 && newton > lo && newton < hi {
                        newton
                    } else {
                        mid
                    }
                }
            };
            if next == x || hi - lo <= f64::EPSILON * total {
                break;
            }
            x = next;
        }
        if best.0 <= RESIDUAL_TOL * total {
            Ok(best.1)
        } else {
            Err(Error::Numerical {
                message: format!("budget residual stalled at {:e}", best.0),
                bracket: Some((lo, self.residual(lo)?, hi, self.residual(hi)?)),
            })
        }
    }
}

/// Budget residual `Σ_k P_k − P_total` for a trial `P_1`, with each other
/// `P_k` chosen so that `R_k/γ_k = R_1/γ_1`.
pub fn proportionality_residual(
    p1: f64,
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    proportions: &[f64],
    total_power: f64,
) -> Result<f64> {
    if !(p1.is_finite() && (0.0..=total_power).contains(&p1)) {
        return Err(Error::invalid(format!(
            "trial power {p1} outside [0, {total_power}]"
        )));
    }
    Problem::new(channel, assignment, proportions, total_power)?.residual(p1)
}

/// Exact proportional-rate split via safeguarded Newton iteration.
pub fn rootfind_power_split(
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    proportions: &[f64],
    total_power: f64,
) -> Result<PowerAllocation> {
    rootfind_power_split_with(
        channel,
        assignment,
        proportions,
        total_power,
        RootStrategy::Newton,
    )
}

pub fn rootfind_power_split_with(
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    proportions: &[f64],
    total_power: f64,
    strategy: RootStrategy,
) -> Result<PowerAllocation> {
    let problem = Problem::new(channel, assignment, proportions, total_power)?;
    let p1 = problem.solve(strategy)?;
    let mut totals = problem.totals(p1)?;
    // User 1 absorbs the (≤ 1e-9 relative) residual so the budget is exact.
    totals[0] = (total_power - totals[1..].iter().sum::<f64>()).max(0.0);
    let user_powers = problem
        .gains
        .iter()
        .zip(&totals)
        .map(|(g, &p)| water_fill(g, p).map(|wf| wf.powers))
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerAllocation::from_user_powers(assignment, &user_powers))
}
