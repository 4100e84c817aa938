//! Exclusive subcarrier-to-user assignment under per-user quotas.

use crate::channel::ChannelMatrix;
use crate::system::QuotaVector;
use crate::{Error, Result};

/// Binary ownership matrix `c[k][n]`: every subcarrier has exactly one owner
/// and user `k` owns exactly `N_k` subcarriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentMatrix {
    num_users: usize,
    owners: Vec<usize>,
    quotas: QuotaVector,
}

impl AssignmentMatrix {
    /// Builds an assignment from the owner of each subcarrier. Quotas are the
    /// resulting row counts.
    pub fn from_owners(num_users: usize, owners: Vec<usize>) -> Result<Self> {
        if num_users == 0 || owners.is_empty() {
            return Err(Error::invalid("assignment needs K >= 1 and N >= 1"));
        }
        let mut counts = vec![0usize; num_users];
        for &o in &owners {
            if o >= num_users {
                return Err(Error::invalid(format!(
                    "owner {o} out of range for {num_users} users"
                )));
            }
            counts[o] += 1;
        }
        Ok(Self {
            num_users,
            owners,
            quotas: QuotaVector::new(counts)?,
        })
    }

    /// Builds an assignment from 0/1 rows (user-major).
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("assignment rows have unequal lengths"));
        }
        let mut owners = Vec::with_capacity(n);
        for col in 0..n {
            let holders: Vec<usize> = (0..k).filter(|&u| rows[u][col] != 0).collect();
            if holders.len() != 1 || rows.iter().any(|r| r[col] > 1) {
                return Err(Error::invalid(format!(
                    "subcarrier {} must have exactly one owner",
                    col + 1
                )));
            }
            owners.push(holders[0]);
        }
        Self::from_owners(k, owners)
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_subcarriers(&self) -> usize {
        self.owners.len()
    }

    pub fn quotas(&self) -> &QuotaVector {
        &self.quotas
    }

    pub fn owner(&self, subcarrier: usize) -> usize {
        self.owners[subcarrier]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owners
    }

    /// `c[k][n]`.
    pub fn owns(&self, user: usize, subcarrier: usize) -> bool {
        self.owners[subcarrier] == user
    }

    /// Subcarrier indices owned by `user`, ascending.
    pub fn subcarriers_of(&self, user: usize) -> Vec<usize> {
        (0..self.owners.len())
            .filter(|&n| self.owners[n] == user)
            .collect()
    }

    /// Channel gains on the subcarriers owned by `user`, in subcarrier order.
    pub fn gains_of(&self, channel: &ChannelMatrix, user: usize) -> Vec<f64> {
        self.subcarriers_of(user)
            .into_iter()
            .map(|n| channel.get(user, n))
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.num_users)
            .map(|k| self.owners.iter().map(|&o| u8::from(o == k)).collect())
            .collect()
    }

    pub(crate) fn check_against(&self, channel: &ChannelMatrix) -> Result<()> {
        if channel.num_users() != self.num_users || channel.num_subcarriers() != self.owners.len() {
            return Err(Error::invalid(format!(
                "assignment is {}x{} but channel is {}x{}",
                self.num_users,
                self.owners.len(),
                channel.num_users(),
                channel.num_subcarriers()
            )));
        }
        Ok(())
    }

    /// Returns a copy with user rows reordered like [`ChannelMatrix::permute_users`].
    pub fn permute_users(&self, order: &[usize]) -> Self {
        let mut inverse = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        let owners = self.owners.iter().map(|&o| inverse[o]).collect();
        Self::from_owners(self.num_users, owners).expect("permutation of a valid assignment")
    }
}

fn equal_power_rate(channel: &ChannelMatrix, per_subcarrier: f64, user: usize, n: usize) -> f64 {
    (1.0 + per_subcarrier * channel.get(user, n)).log2()
}

/// Greedy proportional-fair assignment followed by pairwise-swap refinement.
///
/// Rates are estimated with the uniform power `total_power / N` on every
/// subcarrier.
///
/// 1. In user-index order, each user takes its best unassigned subcarrier.
/// 2. While subcarriers remain, the user with remaining quota and the lowest
///    provisional rate takes its best unassigned subcarrier (rate ties go to
///    the lower user index, gain ties to the lower subcarrier index).
/// 3. Pairs of subcarriers held by different users are exchanged while some
///    exchange raises the total provisional rate; the largest gain is applied
///    first (scan order `n < m` breaks ties). Exchanges keep quotas intact.
pub fn assign_subcarriers(
    channel: &ChannelMatrix,
    quotas: &QuotaVector,
    total_power: f64,
) -> Result<AssignmentMatrix> {
    let k = channel.num_users();
    let n = channel.num_subcarriers();
    if quotas.num_users() != k {
        return Err(Error::invalid(format!(
            "{} quotas for a channel with {k} users",
            quotas.num_users()
        )));
    }
    if quotas.total() != n {
        return Err(Error::invalid(format!(
            "quotas sum to {} but the channel has {n} subcarriers",
            quotas.total()
        )));
    }
    if !(total_power.is_finite() && total_power > 0.0) {
        return Err(Error::invalid("total power must be > 0"));
    }
    let p = total_power / n as f64;
    let quota = quotas.counts();

    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut held = vec![0usize; k];
    let mut rate = vec![0.0f64; k];

    let best_free = |owner: &[Option<usize>], user: usize| -> usize {
        (0..n)
            .filter(|&sc| owner[sc].is_none())
            .fold(None, |best, sc| match best {
                Some(b) if channel.get(user, sc) <= channel.get(user, b) => Some(b),
                _ => Some(sc),
            })
            .expect("a free subcarrier exists while quota remains")
    };

    for user in 0..k {
        let sc = best_free(&owner, user);
        owner[sc] = Some(user);
        held[user] += 1;
        rate[user] += equal_power_rate(channel, p, user, sc);
    }
    for _ in k..n {
        let user = (0..k)
            .filter(|&u| held[u] < quota[u])
            .fold(None, |acc: Option<usize>, u| match acc {
                Some(b) if rate[u] >= rate[b] => Some(b),
                _ => Some(u),
            })
            .expect("remaining subcarriers imply remaining quota");
        let sc = best_free(&owner, user);
        owner[sc] = Some(user);
        held[user] += 1;
        rate[user] += equal_power_rate(channel, p, user, sc);
    }

    let mut owners: Vec<usize> = owner.into_iter().map(|o| o.expect("all owned")).collect();

    // Each applied exchange strictly raises a bounded objective over a finite
    // state space; the cap only guards against float pathologies.
    for _ in 0..n * n + 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            for b in a + 1..n {
                let (ua, ub) = (owners[a], owners[b]);
                if ua == ub {
                    continue;
                }
                let delta = equal_power_rate(channel, p, ub, a)
                    + equal_power_rate(channel, p, ua, b)
                    - equal_power_rate(channel, p, ua, a)
                    - equal_power_rate(channel, p, ub, b);
                if delta > 1e-12 && best.is_none_or(|(d, _, _)| delta > d) {
                    best = Some((delta, a, b));
                }
            }
        }
        match best {
            Some((_, a, b)) => owners.swap(a, b),
            None => break,
        }
    }

    let assignment = AssignmentMatrix::from_owners(k, owners)?;
    debug_assert_eq!(assignment.quotas(), quotas);
    Ok(assignment)
}
