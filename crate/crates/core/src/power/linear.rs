//! The linear method: per-user water-filling with cross-user power totals
//! from a `K×K` linear system.
//!
//! When every user's subcarrier count is proportional to its rate share
//! (`N_k/γ_k` constant) and each user's budget keeps all of its subcarriers
//! above the water line, a water-filled user's rate has the closed form
//!
//! ```text
//! R_k = N_k · log2( W_k · (1 + H_k,min · (P_k − V_k) / N_k) )
//! ```
//!
//! and `R_k/γ_k = R_1/γ_1` reduces to `W_k(1 + H_k,min(P_k − V_k)/N_k) =
//! W_1(1 + H_1,min(P_1 − V_1)/N_1)`, which is linear in `(P_1, P_k)`.

use nalgebra::{DMatrix, DVector};

use super::{user_gains, water_fill, PowerAllocation};
use crate::assignment::AssignmentMatrix;
use crate::channel::ChannelMatrix;
use crate::{Error, Result};

/// Relative tolerance on `N_k/γ_k` being constant across users.
pub const LINEAR_CASE_TOL: f64 = 1e-9;

/// Closed-form water-filling summary of one user's gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserWaterfillSummary {
    /// Power needed to lift every subcarrier to the weakest one's water line:
    /// `Σ_{n≥2} (H_(n) − H_(1)) / (H_(n)·H_(1))` over ascending gains.
    pub v: f64,
    /// Geometric mean of the gain ratios `H_(n)/H_(1)`.
    pub w: f64,
    /// Weakest gain `H_(1)`.
    pub weakest: f64,
    pub count: usize,
}

/// Water-fills `budget` over one user's subcarriers.
pub fn waterfill_user(gains: &[f64], budget: f64) -> Result<Vec<f64>> {
    water_fill(gains, budget).map(|wf| wf.powers)
}

pub fn compute_vw(gains: &[f64]) -> Result<UserWaterfillSummary> {
    if gains.is_empty() {
        return Err(Error::invalid("gains must not be empty"));
    }
    if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::invalid(format!("gain must be > 0, got {g}")));
    }
    let mut sorted = gains.to_vec();
    sorted.sort_by(f64::total_cmp);
    let weakest = sorted[0];
    let v = sorted[1..]
        .iter()
        .map(|h| (h - weakest) / (h * weakest))
        .sum();
    let log_w = sorted.iter().map(|h| (h / weakest).ln()).sum::<f64>() / sorted.len() as f64;
    Ok(UserWaterfillSummary {
        v,
        w: log_w.exp(),
        weakest,
        count: sorted.len(),
    })
}

impl UserWaterfillSummary {
    /// Slope `a` and offset `b` of `W(1 + H_min(P − V)/N) = a·P + b`.
    fn affine(&self) -> (f64, f64) {
        let n = self.count as f64;
        let a = self.w * self.weakest / n;
        let b = self.w * (1.0 - self.weakest * self.v / n);
        (a, b)
    }

    /// Closed-form rate; valid while `budget ≥ v`.
    pub fn rate(&self, budget: f64) -> f64 {
        let (a, b) = self.affine();
        self.count as f64 * (a * budget + b).log2()
    }
}

/// Checks `N_k/γ_k` is the same for every user.
pub fn is_linear_case(quotas: &[usize], proportions: &[f64]) -> bool {
    let base = quotas[0] as f64 / proportions[0];
    quotas
        .iter()
        .zip(proportions)
        .all(|(&n, &g)| ((n as f64 / g) - base).abs() <= LINEAR_CASE_TOL * base)
}

/// Proportional-rate power split for the linear case.
///
/// Solves the `K−1` proportionality rows plus `Σ P_k = total_power`. A user
/// whose solved total comes out negative is pinned at zero, its row removed,
/// and the system re-solved over the remaining users. Each `P_k` is then
/// water-filled over the user's subcarriers. Proportionality is exact when
/// every `P_k ≥ V_k`; otherwise some subcarriers fall below the water line and
/// the split is approximate.
pub fn linear_power_split(
    channel: &ChannelMatrix,
    assignment: &AssignmentMatrix,
    proportions: &[f64],
    total_power: f64,
) -> Result<PowerAllocation> {
    let gains = user_gains(channel, assignment, proportions, total_power)?;
    let quotas = assignment.quotas().counts();
    if !is_linear_case(quotas, proportions) {
        return Err(Error::MethodInapplicable(format!(
            "subcarrier counts {quotas:?} are not proportional to the rate shares; use rootfind"
        )));
    }
    let summaries = gains
        .iter()
        .map(|g| compute_vw(g))
        .collect::<Result<Vec<_>>>()?;
    let totals = solve_totals(&summaries, total_power)?;
    let user_powers = gains
        .iter()
        .zip(&totals)
        .map(|(g, &p)| waterfill_user(g, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerAllocation::from_user_powers(assignment, &user_powers))
}

fn solve_totals(summaries: &[UserWaterfillSummary], total_power: f64) -> Result<Vec<f64>> {
    let k = summaries.len();
    let mut free: Vec<usize> = (0..k).collect();
    let mut totals = vec![0.0; k];
    loop {
        let m = free.len();
        if m == 0 {
            return Err(Error::numerical("every user was pinned at zero power"));
        }
        let reference = free[0];
        let (a_ref, b_ref) = summaries[reference].affine();
        let mut lhs = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        for j in 0..m {
            lhs[(0, j)] = 1.0;
        }
        rhs[0] = total_power;
        for (row, &user) in free.iter().enumerate().skip(1) {
            let (a, b) = summaries[user].affine();
            lhs[(row, row)] = a;
            lhs[(row, 0)] = -a_ref;
            rhs[row] = b_ref - b;
        }
        let solution = lhs
            .lu()
            .solve(&rhs)
            .filter(|s| s.iter().all(|x| x.is_finite()))
            .ok_or_else(|| Error::numerical("singular proportionality system"))?;

        let negative: Vec<usize> = (0..m).filter(|&j| solution[j] < 0.0).collect();
        if negative.is_empty() {
            for (j, &user) in free.iter().enumerate() {
                totals[user] = solution[j];
            }
            // Absorb solver rounding so the budget holds to the last bit.
            let drift = total_power - totals.iter().sum::<f64>();
            let largest = free
                .iter()
                .copied()
                .max_by(|&a, &b| totals[a].total_cmp(&totals[b]))
                .expect("free is nonempty");
            totals[largest] += drift;
            return Ok(totals);
        }
        let pinned: Vec<usize> = negative.iter().map(|&j| free[j]).collect();
        free.retain(|u| !pinned.contains(u));
    }
}
